#pragma once

// A Service in a temporary data directory, listening on a free port on a
// background thread.

#include "landrec/service.hpp"

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <thread>

namespace landrec::testing {

struct TempDir {
    std::filesystem::path path;

    TempDir()
    {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() /
               ("landrec-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline service::ServiceConfig test_config(const std::filesystem::path& dir, unsigned bits = 256)
{
    service::ServiceConfig c;
    c.port = 0;
    c.data_dir = dir;
    c.key_bits = bits;
    c.quiet = true;
    return c;
}

struct TestServer {
    std::unique_ptr<service::Service> svc;
    std::thread thread;
    int port = 0;
    std::string url;

    explicit TestServer(const service::ServiceConfig& config)
        : svc(std::make_unique<service::Service>(config))
    {
        port = svc->bind();
        url = "http://127.0.0.1:" + std::to_string(port);
        thread = std::thread([this] { svc->listen(); });
    }
    ~TestServer()
    {
        svc->stop();
        thread.join();
    }
    TestServer(const TestServer&) = delete;
    TestServer& operator=(const TestServer&) = delete;
};

} // namespace landrec::testing
