#include "iai/cli.h"

int main(int argc, char** argv) { return iai::cli::run(argc, argv); }
