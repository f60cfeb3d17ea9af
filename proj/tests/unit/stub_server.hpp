#pragma once

// In-process HTTP stand-in for an image-generation service. Records arrival
// times and the peak number of concurrently handled requests.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "httplib.h"
#include "semaug/generation_client.hpp"
#include "semaug/image_codec.hpp"

namespace semaug::test {

struct StubReply {
    int status = 200;
    std::string body;
};

/// Well-formed 200 reply carrying a flat image of the requested size.
inline StubReply png_reply(int width, int height, uint8_t shade = 90) {
    RgbImage img{width, height, std::vector<uint8_t>(static_cast<std::size_t>(width) * height * 3, shade)};
    return {200, Json{{"image_base64", base64_encode(encode_png(img))}}.dump()};
}

inline StubReply echo_reply(const Json& request) {
    return png_reply(request.at("width").get<int>(), request.at("height").get<int>());
}

class StubServer {
public:
    using Handler = std::function<StubReply(const Json& request, int call_index)>;

    explicit StubServer(Handler handler, std::chrono::milliseconds latency = std::chrono::milliseconds(0),
                        std::string path = "/generate")
        : handler_(std::move(handler)), latency_(latency) {
        server_.Post(path, [this](const httplib::Request& req, httplib::Response& res) {
            const int now = ++in_flight_;
            int seen = peak_.load();
            while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
            }
            int index;
            {
                std::lock_guard lock(mu_);
                index = static_cast<int>(arrivals_.size());
                arrivals_.push_back(std::chrono::steady_clock::now());
            }
            if (latency_.count() > 0) std::this_thread::sleep_for(latency_);
            StubReply reply;
            try {
                reply = handler_(Json::parse(req.body), index);
            } catch (const std::exception& e) {
                reply = {400, e.what()};
            }
            --in_flight_;
            res.status = reply.status;
            res.set_content(reply.body, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    StubServer(const StubServer&) = delete;
    StubServer& operator=(const StubServer&) = delete;

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    int peak_in_flight() const { return peak_.load(); }
    std::vector<std::chrono::steady_clock::time_point> arrivals() const {
        std::lock_guard lock(mu_);
        return arrivals_;
    }
    std::size_t calls() const { return arrivals().size(); }

private:
    httplib::Server server_;
    Handler handler_;
    std::chrono::milliseconds latency_;
    int port_ = 0;
    std::thread thread_;
    std::atomic<int> in_flight_{0};
    std::atomic<int> peak_{0};
    mutable std::mutex mu_;
    std::vector<std::chrono::steady_clock::time_point> arrivals_;
};

inline BackendConfig remote_config(const std::string& url, int max_in_flight = 4, int retries = 3,
                                   int backoff_ms = 500) {
    BackendConfig cfg;
    cfg.kind = BackendKind::Remote;
    cfg.endpoint = url;
    cfg.timeout_ms = 5000;
    cfg.max_in_flight = max_in_flight;
    cfg.retries = retries;
    cfg.backoff_base_ms = backoff_ms;
    return cfg;
}

/// A loopback port with nothing listening: bound once to learn a free number,
/// then closed.
inline int closed_port() {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    ::close(fd);
    return ntohs(addr.sin_port);
}

/// Independent FNV-1a-64: the multiply by the prime is spelled out as shifts.
inline uint64_t reference_fnv1a64(const std::string& s) {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h += (h << 1) + (h << 4) + (h << 5) + (h << 7) + (h << 8) + (h << 40);
    }
    return h;
}

/// Quadrant colors derived from the reference hash, byte by byte.
inline std::array<std::array<uint8_t, 3>, 4> reference_quadrants(const std::string& prompt, uint64_t seed) {
    const uint64_t h = reference_fnv1a64(prompt) ^ seed;
    uint8_t be[16];
    for (int i = 0; i < 16; ++i) be[i] = static_cast<uint8_t>((h >> (8 * (7 - (i % 8)))) & 0xFF);
    std::array<std::array<uint8_t, 3>, 4> q{};
    for (int k = 0; k < 4; ++k) q[k] = {be[3 * k], be[3 * k + 1], be[3 * k + 2]};
    return q;
}

}  // namespace semaug::test
