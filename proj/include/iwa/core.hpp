#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace iwa {

// Error hierarchy. Every failure the library reports derives from Error so
// callers (the CLI in particular) can map them to exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidArgument : Error {
    using Error::Error;
};
struct PrecisionError : Error {
    using Error::Error;
};
struct DivisionByZero : Error {
    using Error::Error;
};
struct PoleError : Error {
    using Error::Error;
};

// Raised when a quotient leaves a remainder or is not integral enough.
// component/index locate the first offending coefficient; row is set by
// callers that divide several rows at once (1-based, 0 when unused).
struct DivisibilityError : Error {
    int component = 0;
    int index = 0;
    int row = 0;
    std::vector<int> rows;
    DivisibilityError(const std::string& what, int comp, int idx)
        : Error(what), component(comp), index(idx) {}
};

struct Precision {
    int p = 5;
    int M = 20;  // coefficients known mod p^M
    int N = 32;  // series known mod X^N

    void validate() const;
    bool operator==(const Precision&) const = default;
};

inline bool is_prime(long n) {
    if (n < 2) return false;
    for (long d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline void Precision::validate() const {
    if (p < 3 || !is_prime(p)) throw InvalidArgument("p must be an odd prime");
    if (M < 1) throw InvalidArgument("p_prec must be positive");
    if (N < 1) throw InvalidArgument("x_prec must be positive");
}

inline mpz_class pow_ui(long p, long e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e));
    return r;
}

inline long ipow(long b, long e) {
    long r = 1;
    while (e-- > 0) r *= b;
    return r;
}

// v_p of a nonzero integer; strips the p-part from x in place.
inline long remove_p(mpz_class& x, long p) {
    if (x == 0) return 0;
    mpz_class pp = p;
    return static_cast<long>(mpz_remove(x.get_mpz_t(), x.get_mpz_t(), pp.get_mpz_t()));
}

inline long val_p(mpz_class x, long p) { return remove_p(x, p); }

inline mpz_class mod(const mpz_class& a, const mpz_class& m) {
    mpz_class r;
    mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

inline mpz_class inv_mod(const mpz_class& a, const mpz_class& m) {
    mpz_class r;
    if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0)
        throw DivisionByZero("element is not invertible modulo " + m.get_str());
    return r;
}

inline long pmod(long a, long m) {
    long r = a % m;
    return r < 0 ? r + m : r;
}

inline long powmod_l(long b, long e, long m) {
    long r = 1 % m;
    b = pmod(b, m);
    while (e > 0) {
        if (e & 1) r = static_cast<long>((__int128)r * b % m);
        b = static_cast<long>((__int128)b * b % m);
        e >>= 1;
    }
    return r;
}

// Smallest primitive root modulo the odd prime p.
inline int primitive_root(int p) {
    std::vector<int> q;
    int n = p - 1;
    for (int d = 2; d * d <= n; ++d)
        if (n % d == 0) {
            q.push_back(d);
            while (n % d == 0) n /= d;
        }
    if (n > 1) q.push_back(n);
    for (int g = 2; g < p; ++g) {
        bool ok = true;
        for (int d : q)
            if (powmod_l(g, (p - 1) / d, p) == 1) {
                ok = false;
                break;
            }
        if (ok) return g;
    }
    return 1;  // p = 2 only
}

// Discrete log base the smallest primitive root: a = g^ind mod p.
inline int index_mod_p(long a, int p) {
    a = pmod(a, p);
    if (a == 0) throw InvalidArgument("index of a multiple of p");
    int g = primitive_root(p);
    long x = 1;
    for (int e = 0; e < p - 1; ++e) {
        if (x == a) return e;
        x = x * g % p;
    }
    throw InvalidArgument("no discrete log");
}

// Worker count: IWA_THREADS caps parallelism, default is the core count.
inline unsigned thread_budget() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* s = std::getenv("IWA_THREADS")) {
        long v = std::strtol(s, nullptr, 10);
        if (v >= 1) return std::min<unsigned>(static_cast<unsigned>(v), hw);
    }
    return hw;
}

namespace detail {
inline thread_local bool in_worker = false;
}

// Runs f(0..n-1). Each index must write only its own output slot. Calls from
// inside a worker, or with worth == false, run serially.
inline void parallel_for(int n, const std::function<void(int)>& f, bool worth = true) {
    unsigned t = std::min<unsigned>(thread_budget(), static_cast<unsigned>(std::max(n, 0)));
    if (t <= 1 || !worth || detail::in_worker) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(t);
    for (unsigned w = 0; w < t; ++w)
        pool.emplace_back([&, w] {
            detail::in_worker = true;
            try {
                for (int i = static_cast<int>(w); i < n; i += static_cast<int>(t)) f(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace iwa
