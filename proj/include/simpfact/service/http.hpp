#pragma once

#include <string>

#include <httplib.h>

#include "simpfact/service/service.hpp"

namespace simpfact::service {

namespace detail {

inline void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

/// Runs a handler, mapping library errors to JSON error bodies. Validation
/// problems in a request are the client's fault (400); anything else is 500.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    send_error(res, e.status(), e.code(), e.what());
  } catch (const ContractError& e) {
    send_error(res, 400, "bad_request", e.what());
  } catch (const ValidationError& e) {
    send_error(res, 400, "invalid_request", e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, "bad_request", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

inline json parse_body(const httplib::Request& req) {
  auto j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ContractError("request body must be a JSON object");
  return j;
}

inline std::string query_annotator(const httplib::Request& req) {
  if (!req.has_param("annotator")) throw ContractError("missing query parameter 'annotator'");
  return req.get_param_value("annotator");
}

}  // namespace detail

/// Binds the annotation wire protocol to `svc`. The server must not outlive
/// the service.
inline void install_routes(httplib::Server& srv, AnnotationService& svc) {
  using httplib::Request;
  using httplib::Response;

  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  srv.Options(R"(/.*)", [](const Request&, Response& res) { res.status = 204; });

  srv.Post("/annotators", [&svc](const Request& req, Response& res) {
    detail::guarded(res, [&] {
      const auto body = detail::parse_body(req);
      const auto id = corpus::detail::require_string(body, "id");
      std::optional<std::vector<QualificationAnswer>> answers;
      if (auto it = body.find("answers"); it != body.end() && !it->is_null()) answers = answers_from_json(*it);
      detail::send_json(res, 200, svc.register_and_qualify(id, answers).to_json());
    });
  });

  srv.Get("/tasks/next", [&svc](const Request& req, Response& res) {
    detail::guarded(res, [&] {
      const auto task = svc.next_task(detail::query_annotator(req));
      if (task) {
        detail::send_json(res, 200, corpus::to_json(*task));
      } else {
        res.status = 204;
      }
    });
  });

  srv.Post("/votes", [&svc](const Request& req, Response& res) {
    detail::guarded(res, [&] {
      const auto body = detail::parse_body(req);
      std::array<json, 3> labels;
      for (auto c : kAllCategories) {
        auto it = body.find(std::string(to_string(c)));
        if (it == body.end()) {
          throw ServiceError("invalid_label", 400, std::string("missing label '") + std::string(to_string(c)) + "'");
        }
        labels[static_cast<std::size_t>(c)] = *it;
      }
      detail::send_json(res, 201,
                        svc.submit_vote(corpus::detail::require_string(body, "annotator"),
                                        corpus::detail::require_string(body, "pair_id"), labels));
    });
  });

  srv.Get("/export", [&svc](const Request&, Response& res) {
    detail::guarded(res, [&] { detail::send_json(res, 200, svc.export_results().to_json()); });
  });

  srv.Get("/progress", [&svc](const Request& req, Response& res) {
    detail::guarded(res, [&] {
      std::optional<std::string> who;
      if (req.has_param("annotator")) who = req.get_param_value("annotator");
      detail::send_json(res, 200, svc.progress(who));
    });
  });
}

}  // namespace simpfact::service
