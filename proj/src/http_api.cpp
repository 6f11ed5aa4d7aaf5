#include "iai/http_api.h"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "iai/csv.h"
#include "iai/elo_io.h"
#include "iai/errors.h"

namespace iai::survey {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
    send_json(res, status, json{{"error", kind}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
    try {
        auto body = json::parse(req.body);
        if (!body.is_object()) throw ContractViolation("request body must be a JSON object");
        return body;
    } catch (const json::exception& e) {
        throw ContractViolation(std::string("malformed JSON body: ") + e.what());
    }
}

template <typename T>
T field(const json& body, const char* name) {
    auto it = body.find(name);
    if (it == body.end()) throw ContractViolation(std::string("missing field '") + name + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ContractViolation(std::string("field '") + name + "' has the wrong type");
    }
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            handler(req, res);
        } catch (const Error& e) {
            send_error(res, status_for(e), e.kind(), e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "internal", e.what());
        }
    };
}

json firm_card(const SurveyStore& store, const elo::FirmId& id) {
    auto f = store.firm(id);
    if (!f) return json{{"id", id}, {"ticker", ""}, {"name", ""}};
    return json{{"id", f->id}, {"ticker", f->ticker}, {"name", f->name}};
}

}  // namespace

int status_for(const Error& e) {
    const auto& k = e.kind();
    if (k == "not_found") return 404;
    if (k == "ordering") return 409;
    if (k == "capacity") return 503;
    if (k == "persistence" || k == "network") return 500;
    return 400;
}

struct HttpServer::Impl {
    Impl(SurveyStore& s, HttpOptions o) : store(s), options(std::move(o)) {}

    SurveyStore& store;
    HttpOptions options;
    httplib::Server server;
    int port = -1;
};

HttpServer::HttpServer(SurveyStore& store, HttpOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {
    auto& srv = impl_->server;
    SurveyStore& st = store;

    srv.Get("/api/health", guarded([&st](const httplib::Request&, httplib::Response& res) {
                send_json(res, 200, json{{"status", "ok"}, {"votes", st.votes().size()}});
            }));

    srv.Post("/api/analysts", guarded([&st](const httplib::Request& req, httplib::Response& res) {
                 const auto body = parse_body(req);
                 const auto a = st.register_analyst(field<bool>(body, "certified"),
                                                    body.contains("state") ? field<std::string>(body, "state") : "");
                 send_json(res, 201, json{{"analyst_id", a.analyst_id},
                                          {"certified", a.certified},
                                          {"state", a.state},
                                          {"created_at", format_timestamp(a.created_at)}});
             }));

    srv.Post("/api/sessions", guarded([&st](const httplib::Request& req, httplib::Response& res) {
                 const auto body = parse_body(req);
                 const auto s = st.create_session(field<std::string>(body, "analyst_id"));
                 send_json(res, 201, json{{"session_id", s.session_id},
                                          {"analyst_id", s.analyst_id},
                                          {"pair_count", s.pairs.size()},
                                          {"next_index", s.next_index}});
             }));

    srv.Get(R"(/api/sessions/([^/]+)/next)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
                const auto next = st.next_pair(req.matches[1]);
                if (next.complete) {
                    send_json(res, 200, json{{"complete", true}, {"pair_index", next.pair_index}});
                    return;
                }
                send_json(res, 200, json{{"complete", false},
                                         {"pair_index", next.pair_index},
                                         {"pair_count", kPairsPerSession},
                                         {"firm_a", firm_card(st, next.firm_a)},
                                         {"firm_b", firm_card(st, next.firm_b)}});
            }));

    srv.Post(R"(/api/sessions/([^/]+)/votes)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
                 const auto body = parse_body(req);
                 const auto index = field<long long>(body, "pair_index");
                 if (index < 0) throw ContractViolation("pair_index must be non-negative");
                 const auto receipt = st.submit_vote(req.matches[1], static_cast<std::size_t>(index),
                                                     field<std::string>(body, "winner"));
                 const auto& e = receipt.event;
                 send_json(res, receipt.replayed ? 200 : 201,
                           json{{"seq", e.seq},
                                {"pair_index", index},
                                {"winner", e.winner},
                                {"timestamp", format_timestamp(e.timestamp)},
                                {"replayed", receipt.replayed}});
             }));

    srv.Get("/api/ratings", guarded([&st](const httplib::Request& req, httplib::Response& res) {
                RatingsQuery q;
                if (req.has_param("k")) q.k = csv::parse_double(req.get_param_value("k"), "query parameter k");
                if (req.has_param("cutoff") && !req.get_param_value("cutoff").empty()) {
                    q.cutoff = parse_timestamp(req.get_param_value("cutoff"));
                }
                if (req.has_param("certified_only")) {
                    const auto v = req.get_param_value("certified_only");
                    q.certified_only = v == "1" || v == "true";
                }
                json out = json::array();
                for (const auto& r : st.current_ratings(q)) {
                    auto card = firm_card(st, r.firm_id);
                    out.push_back(json{{"rank", r.rank},
                                       {"firm_id", r.firm_id},
                                       {"ticker", card["ticker"]},
                                       {"name", card["name"]},
                                       {"rating", r.rating}});
                }
                send_json(res, 200, out);
            }));

    srv.Get("/api/export/votes.csv", guarded([&st](const httplib::Request&, httplib::Response& res) {
                res.set_content(st.export_votes_csv(), "text/csv");
            }));

    if (impl_->options.static_dir) {
        if (!srv.set_mount_point("/", impl_->options.static_dir->string())) {
            throw ContractViolation("static directory does not exist: " + impl_->options.static_dir->string());
        }
    }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
    if (impl_->port >= 0) return impl_->port;
    if (impl_->options.port == 0) {
        impl_->port = impl_->server.bind_to_any_port(impl_->options.host);
    } else if (impl_->server.bind_to_port(impl_->options.host, impl_->options.port)) {
        impl_->port = impl_->options.port;
    }
    if (impl_->port < 0) {
        throw NetworkError("cannot listen on " + impl_->options.host + ":" + std::to_string(impl_->options.port));
    }
    return impl_->port;
}

void HttpServer::run() {
    bind();
    impl_->server.listen_after_bind();
}

void HttpServer::stop() { impl_->server.stop(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace iai::survey
