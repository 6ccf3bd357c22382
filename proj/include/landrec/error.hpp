#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace landrec {

// Every failure the library reports carries a stable machine code
// ("not-owner", "bad-signature", ...). The service maps codes to HTTP
// statuses; the CLI maps them to exit codes.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code))
    {
    }
    explicit Error(std::string code) : Error(code, code) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

} // namespace landrec
