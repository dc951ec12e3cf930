#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace neupath {

// Error categories map onto the CLI exit codes: usage 1, data 2, numeric 3.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Logging: level comes from the METAPATH_SIM_LOG environment variable
// (error, warn, info, debug). Default warn.
// ---------------------------------------------------------------------------

enum class LogLevel : int { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("METAPATH_SIM_LOG");
        if (!env) return LogLevel::Warn;
        std::string s(env);
        if (s == "error") return LogLevel::Error;
        if (s == "warn") return LogLevel::Warn;
        if (s == "info") return LogLevel::Info;
        if (s == "debug") return LogLevel::Debug;
        return LogLevel::Warn;
    }();
    return level;
}

inline void log_msg(LogLevel lvl, const std::string& msg) {
    if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(lvl)], msg.c_str());
}

inline void log_warn(const std::string& msg) { log_msg(LogLevel::Warn, msg); }
inline void log_info(const std::string& msg) { log_msg(LogLevel::Info, msg); }
inline void log_debug(const std::string& msg) { log_msg(LogLevel::Debug, msg); }

// ---------------------------------------------------------------------------
// Checked 64-bit unsigned arithmetic for path counts.
// ---------------------------------------------------------------------------

inline uint64_t checked_add(uint64_t a, uint64_t b) {
    uint64_t r;
    if (__builtin_add_overflow(a, b, &r))
        throw NumericError("64-bit path count overflow in addition");
    return r;
}

inline uint64_t checked_mul(uint64_t a, uint64_t b) {
    uint64_t r;
    if (__builtin_mul_overflow(a, b, &r))
        throw NumericError("64-bit path count overflow in multiplication");
    return r;
}

// ---------------------------------------------------------------------------
// Deterministic RNG. std::mt19937_64 output is pinned by the standard, but
// the standard distributions are not, so bounded draws are hand-rolled here.
// ---------------------------------------------------------------------------

class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next() { return gen_(); }

    // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    uint64_t below(uint64_t n) {
        if (n == 0) throw NumericError("Rng::below(0)");
        uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    // Uniform double in [0, 1) with 53 random bits.
    double real01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * real01(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct values from [0, n), in draw order (partial Fisher-Yates).
    std::vector<uint32_t> sample_distinct(uint32_t n, uint32_t k) {
        if (k > n) throw DataError("sample_distinct: k exceeds population size");
        std::vector<uint32_t> pool(n);
        for (uint32_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<uint32_t> out;
        out.reserve(k);
        for (uint32_t i = 0; i < k; ++i) {
            uint32_t j = i + static_cast<uint32_t>(below(n - i));
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

  private:
    std::mt19937_64 gen_;
};

// Scores are written with 12 significant digits everywhere.
inline std::string format_score(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// FNV-1a, used for schema fingerprints and determinism digests.
inline uint64_t fnv1a(const std::string& s, uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace neupath
