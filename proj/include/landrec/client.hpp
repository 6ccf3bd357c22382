#pragma once

// Minimal JSON-over-HTTP client for the service API.

#include "landrec/json_codec.hpp"

#include <functional>
#include <memory>
#include <string>

namespace httplib {
class Client;
}

namespace landrec::client {

using codec::json;

// Percent-encodes a query parameter value.
std::string escape(const std::string& value);

// Sees every exchange: "METHOD path", request body (empty for GET), raw
// response body.
using Observer = std::function<void(const std::string& request, const std::string& request_body,
                                    const std::string& response_body)>;

class ApiClient {
public:
    // base_url like "http://127.0.0.1:8080".
    explicit ApiClient(const std::string& base_url);
    ~ApiClient();

    // Non-2xx responses throw Error(code, message) from the error envelope;
    // transport failures throw Error("unreachable").
    json get(const std::string& path, const std::string& token = {}) const;
    json post(const std::string& path, const json& body, const std::string& token = {}) const;

    void set_observer(Observer observer) { observer_ = std::move(observer); }

private:
    std::unique_ptr<httplib::Client> http_;
    std::string base_;
    Observer observer_;
};

} // namespace landrec::client
