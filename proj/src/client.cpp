#include "landrec/client.hpp"

#include "landrec/error.hpp"

#include <httplib.h>

namespace landrec::client {

namespace {

json unwrap(const httplib::Result& r, const std::string& what)
{
    if (!r) throw Error("unreachable", what + ": " + httplib::to_string(r.error()));
    json body;
    try {
        body = r->body.empty() ? json::object() : json::parse(r->body);
    } catch (const json::exception&) {
        throw Error("bad-response", what + ": response is not JSON (HTTP " + std::to_string(r->status) + ")");
    }
    if (r->status >= 200 && r->status < 300) return body;
    if (body.contains("error") && body["error"].is_object()) {
        const auto& e = body["error"];
        throw Error(e.value("code", "http-" + std::to_string(r->status)), e.value("message", what));
    }
    throw Error("http-" + std::to_string(r->status), what);
}

httplib::Headers auth(const std::string& token)
{
    if (token.empty()) return {};
    return {{"Authorization", "Bearer " + token}};
}

} // namespace

std::string escape(const std::string& value) { return httplib::detail::encode_query_param(value); }

ApiClient::ApiClient(const std::string& base_url)
    : http_(std::make_unique<httplib::Client>(base_url)), base_(base_url)
{
    http_->set_connection_timeout(5);
    http_->set_read_timeout(60);
}

ApiClient::~ApiClient() = default;

json ApiClient::get(const std::string& path, const std::string& token) const
{
    auto r = http_->Get(path, auth(token));
    if (observer_ && r) observer_("GET " + path, "", r->body);
    return unwrap(r, "GET " + path);
}

json ApiClient::post(const std::string& path, const json& body, const std::string& token) const
{
    const std::string text = body.dump();
    auto r = http_->Post(path, auth(token), text, "application/json");
    if (observer_ && r) observer_("POST " + path, text, r->body);
    return unwrap(r, "POST " + path);
}

} // namespace landrec::client
