// rng.hpp - seeded, stream-split random draws for the stochastic model
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "adsim/instance.hpp"

namespace adsim {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

/// A single-owner random stream. Identical (seed, stream) pairs reproduce
/// identical draw sequences on every platform (mt19937_64 output is pinned by
/// the standard; we avoid std::*_distribution, whose mappings are not).
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream),
          eng_(detail::splitmix64(detail::splitmix64(seed) ^ (stream * 0xd1342543de82ef95ULL + 1))) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    // Uniform in [0,1) with 53 random bits.
    double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 eng_;
};

/// Conventional stream roles within one simulation replica.
/// Replica r uses stream ids r*kStreamStride + role.
enum StreamRole : std::uint64_t {
    kArrivalStream = 0,
    kClickStream = 1,
    kBudgetStream = 2,
    kMiscStream = 3,
};
constexpr std::uint64_t kStreamStride = 16;

/// The streams one simulation replica owns.
struct SimStreams {
    RngStream arrivals;
    RngStream clicks;
    RngStream budgets;
    RngStream misc;

    SimStreams(std::uint64_t seed, std::uint64_t replica = 0)
        : arrivals(seed, replica * kStreamStride + kArrivalStream),
          clicks(seed, replica * kStreamStride + kClickStream),
          budgets(seed, replica * kStreamStride + kBudgetStream),
          misc(seed, replica * kStreamStride + kMiscStream) {}
};

/// Draws the keyword arriving in one time slot: q with probability nu*theta_q,
/// -1 (no arrival) with probability 1-nu. Consumes exactly one uniform no
/// matter the outcome, so arrival sample paths stay paired across algorithm
/// parameters.
inline int sample_query(const ProblemInstance& inst, RngStream& stream) {
    double u = stream.uniform();
    if (u >= inst.arrival_prob) return -1;
    double x = u / inst.arrival_prob;  // uniform in [0,1) given an arrival
    double cum = 0.0;
    for (int q = 0; q < inst.num_keywords; ++q) {
        cum += inst.keyword_prob[q];
        if (x < cum) return q;
    }
    return inst.num_keywords - 1;
}

/// Same, with per-hour joint rates nu_q(h) (non-stationary arrivals).
/// `rates` holds the joint keyword rates for the current hour; their sum is
/// the arrival probability. One uniform per call.
inline int sample_query_rates(const std::vector<double>& rates, RngStream& stream) {
    double u = stream.uniform();
    double cum = 0.0;
    for (int q = 0; q < (int)rates.size(); ++q) {
        cum += rates[q];
        if (u < cum) return q;
    }
    return -1;
}

/// Click draw for client i in slot s after a query for keyword q.
inline bool sample_click(const ProblemInstance& inst, RngStream& stream, int q, int i, int s) {
    return stream.bernoulli(inst.ctr[q][i][s]);
}

/// Integer randomization of a nonnegative real budget: ceil(b) with
/// probability b - floor(b), floor(b) otherwise. Integer b always returns b.
/// Consumes one uniform in every case.
inline long long sample_integer_budget(RngStream& stream, double b) {
    double lo = std::floor(b);
    double frac = b - lo;
    double u = stream.uniform();
    return (long long)lo + (u < frac ? 1 : 0);
}

/// Identical contract for impression requirements.
inline long long sample_integer_requirement(RngStream& stream, double m) {
    return sample_integer_budget(stream, m);
}

}  // namespace adsim
