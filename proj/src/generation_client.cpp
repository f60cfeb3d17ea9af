#include "semaug/generation_client.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "semaug/hash.hpp"
#include "semaug/image_codec.hpp"

namespace semaug {

namespace {

using Clock = std::chrono::steady_clock;

int64_t elapsed_since(Clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

std::string excerpt(const std::string& body) {
    constexpr std::size_t kMax = 200;
    return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

bool retryable(const GenerationError& e) {
    switch (e.kind()) {
        case GenerationErrorKind::Timeout:
        case GenerationErrorKind::ConnectionFailed:
            return true;
        case GenerationErrorKind::ServerError:
            return e.status() >= 500 || e.status() == 408 || e.status() == 429;
        default:
            return false;
    }
}

struct Endpoint {
    std::string origin;  // scheme://host:port
    std::string base_path;
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    const auto path = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    Endpoint ep;
    ep.origin = url.substr(0, path);
    if (path != std::string::npos) {
        ep.base_path = url.substr(path);
        while (!ep.base_path.empty() && ep.base_path.back() == '/') ep.base_path.pop_back();
    }
    return ep;
}

GenerationResult remote_attempt(const BackendConfig& cfg, const GenerationRequest& req) {
    const auto t0 = Clock::now();
    const Endpoint ep = split_endpoint(cfg.endpoint);
    httplib::Client client(ep.origin);
    const auto timeout = std::chrono::milliseconds(cfg.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    auto res = client.Post(ep.base_path + "/generate", req.to_json().dump(), "application/json");
    if (!res) {
        const auto err = res.error();
        const bool timed_out = err == httplib::Error::Read || err == httplib::Error::Write ||
                               err == httplib::Error::ConnectionTimeout;
        throw GenerationError(timed_out ? GenerationErrorKind::Timeout : GenerationErrorKind::ConnectionFailed,
                              "request to " + cfg.endpoint + " failed: " + httplib::to_string(err));
    }
    if (res->status != 200) {
        throw GenerationError(GenerationErrorKind::ServerError,
                              "backend returned HTTP " + std::to_string(res->status), res->status, excerpt(res->body));
    }

    std::vector<uint8_t> png;
    try {
        const Json body = Json::parse(res->body);
        png = base64_decode(body.at("image_base64").get<std::string>());
    } catch (const std::exception& e) {
        throw GenerationError(GenerationErrorKind::InvalidImage,
                              std::string("response body is not {\"image_base64\": ...}: ") + e.what(), 200,
                              excerpt(res->body));
    }
    RgbImage decoded;
    try {
        decoded = decode_png(png);
    } catch (const std::exception& e) {
        throw GenerationError(GenerationErrorKind::InvalidImage, std::string("undecodable image: ") + e.what());
    }
    if (decoded.width != req.width || decoded.height != req.height) {
        throw GenerationError(GenerationErrorKind::InvalidImage,
                              "backend returned " + std::to_string(decoded.width) + "x" +
                                  std::to_string(decoded.height) + " for a " + std::to_string(req.width) + "x" +
                                  std::to_string(req.height) + " request");
    }
    return GenerationResult{std::move(png), req, "remote:" + cfg.endpoint, elapsed_since(t0)};
}

}  // namespace

std::string_view to_string(GenerationErrorKind kind) {
    switch (kind) {
        case GenerationErrorKind::InvalidRequest: return "InvalidRequest";
        case GenerationErrorKind::Timeout: return "Timeout";
        case GenerationErrorKind::ConnectionFailed: return "ConnectionFailed";
        case GenerationErrorKind::ServerError: return "ServerError";
        case GenerationErrorKind::InvalidImage: return "InvalidImage";
        case GenerationErrorKind::TransportFailed: return "TransportFailed";
    }
    return "Unknown";
}

GenerationError::GenerationError(GenerationErrorKind kind, const std::string& message, int status,
                                 std::string body_excerpt, std::optional<GenerationErrorKind> cause, int attempts)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      status_(status),
      body_excerpt_(std::move(body_excerpt)),
      cause_(cause),
      attempts_(attempts) {}

void GenerationRequest::validate() const {
    auto fail = [](const std::string& why) { throw GenerationError(GenerationErrorKind::InvalidRequest, why); };
    if (prompt.empty()) fail("prompt must be nonempty");
    if (width <= 0 || height <= 0) fail("width and height must be positive");
    if (width % 8 != 0 || height % 8 != 0) fail("width and height must be multiples of 8");
    if (steps <= 0) fail("steps must be positive");
    if (!(guidance_scale > 0.0)) fail("guidance_scale must be positive");
}

Json GenerationRequest::to_json() const {
    return {{"prompt", prompt},       {"seed", seed},   {"width", width},
            {"height", height},       {"steps", steps}, {"guidance_scale", guidance_scale}};
}

void BackendConfig::validate() const {
    if (kind == BackendKind::Remote) {
        if (endpoint.empty()) {
            throw std::invalid_argument("remote backend requires an endpoint (set backend.endpoint or " +
                                        std::string(kBackendUrlEnv) + ")");
        }
        if (endpoint.rfind("http://", 0) != 0) {
            throw std::invalid_argument("endpoint must be an http:// URL: " + endpoint);
        }
    }
    if (timeout_ms <= 0) throw std::invalid_argument("timeout_ms must be positive");
    if (max_in_flight <= 0) throw std::invalid_argument("max_in_flight must be positive");
    if (retries < 0) throw std::invalid_argument("retries must be nonnegative");
    if (backoff_base_ms <= 0) throw std::invalid_argument("backoff_base_ms must be positive");
}

BackendConfig BackendConfig::from_json(const Json& j) {
    if (!j.is_object()) {
        throw std::invalid_argument("backend config must be an object");
    }
    BackendConfig cfg;
    for (auto& [key, value] : j.items()) {
        try {
            if (key == "kind") {
                const auto k = value.get<std::string>();
                if (k == "mock") cfg.kind = BackendKind::Mock;
                else if (k == "remote") cfg.kind = BackendKind::Remote;
                else throw std::invalid_argument("backend.kind must be 'mock' or 'remote', got '" + k + "'");
            } else if (key == "endpoint") {
                cfg.endpoint = value.get<std::string>();
            } else if (key == "timeout_ms") {
                cfg.timeout_ms = value.get<int>();
            } else if (key == "max_in_flight") {
                cfg.max_in_flight = value.get<int>();
            } else if (key == "retries") {
                cfg.retries = value.get<int>();
            } else if (key == "backoff_base_ms") {
                cfg.backoff_base_ms = value.get<int>();
            } else {
                throw std::invalid_argument("unknown backend key '" + key + "'");
            }
        } catch (const Json::exception& e) {
            throw std::invalid_argument("backend." + key + ": " + e.what());
        }
    }
    return cfg;
}

Json BackendConfig::to_json() const {
    return {{"kind", kind == BackendKind::Mock ? "mock" : "remote"},
            {"endpoint", endpoint},
            {"timeout_ms", timeout_ms},
            {"max_in_flight", max_in_flight},
            {"retries", retries},
            {"backoff_base_ms", backoff_base_ms}};
}

BackendConfig with_env_overrides(BackendConfig cfg) {
    if (const char* url = std::getenv(kBackendUrlEnv); url && *url) {
        cfg.endpoint = url;
    }
    return cfg;
}

std::array<std::array<uint8_t, 3>, 4> mock_quadrant_colors(std::string_view prompt, uint64_t seed) {
    const uint64_t h = fnv1a64(prompt) ^ seed;
    std::array<uint8_t, 16> bytes{};
    for (std::size_t i = 0; i < 8; ++i) {
        bytes[i] = bytes[i + 8] = static_cast<uint8_t>(h >> (56 - 8 * i));
    }
    std::array<std::array<uint8_t, 3>, 4> colors{};
    for (std::size_t k = 0; k < 4; ++k) {
        colors[k] = {bytes[3 * k], bytes[3 * k + 1], bytes[3 * k + 2]};
    }
    return colors;
}

GenerationResult mock_generate(const GenerationRequest& req) {
    req.validate();
    const auto t0 = Clock::now();
    const auto colors = mock_quadrant_colors(req.prompt, req.seed);
    RgbImage img{req.width, req.height, {}};
    img.pixels.resize(static_cast<std::size_t>(req.width) * req.height * 3);
    const int half_w = req.width / 2;
    const int half_h = req.height / 2;
    std::size_t p = 0;
    for (int y = 0; y < req.height; ++y) {
        for (int x = 0; x < req.width; ++x) {
            const auto& c = colors[(y >= half_h ? 2 : 0) + (x >= half_w ? 1 : 0)];
            img.pixels[p++] = c[0];
            img.pixels[p++] = c[1];
            img.pixels[p++] = c[2];
        }
    }
    return GenerationResult{encode_png(img), req, "mock", elapsed_since(t0)};
}

GenerationResult generate(const BackendConfig& cfg, const GenerationRequest& req) {
    req.validate();
    if (cfg.kind == BackendKind::Mock) {
        return mock_generate(req);
    }
    const int attempts = cfg.retries + 1;
    std::optional<GenerationError> last;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(int64_t{cfg.backoff_base_ms} << (attempt - 1)));
        }
        try {
            return remote_attempt(cfg, req);
        } catch (const GenerationError& e) {
            if (!retryable(e)) {
                throw;
            }
            last = e;
        }
    }
    throw GenerationError(GenerationErrorKind::TransportFailed,
                          "gave up after " + std::to_string(attempts) + " attempt(s); last error: " + last->what(),
                          last->status(), last->body_excerpt(), last->kind(), attempts);
}

std::vector<BatchSlot> batch_generate(const BackendConfig& cfg, std::span<const GenerationRequest> reqs,
                                      const CompletionCallback& on_complete) {
    std::vector<std::optional<BatchSlot>> slots(reqs.size());
    std::atomic<std::size_t> next{0};
    std::mutex callback_error_mutex;
    std::exception_ptr callback_error;

    auto worker = [&] {
        for (std::size_t i = next++; i < reqs.size(); i = next++) {
            try {
                slots[i].emplace(generate(cfg, reqs[i]));
            } catch (const GenerationError& e) {
                slots[i].emplace(e);
            } catch (const std::exception& e) {
                slots[i].emplace(GenerationError(GenerationErrorKind::TransportFailed, e.what()));
            }
            if (on_complete) {
                try {
                    on_complete(i, *slots[i]);
                } catch (...) {
                    std::lock_guard lock(callback_error_mutex);
                    if (!callback_error) callback_error = std::current_exception();
                }
            }
        }
    };

    const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.max_in_flight), reqs.size());
    {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    if (callback_error) {
        std::rethrow_exception(callback_error);
    }

    std::vector<BatchSlot> out;
    out.reserve(slots.size());
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

}  // namespace semaug
