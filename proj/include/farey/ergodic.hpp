#pragma once

// Sampling, invariance checks and the convergence-rate / degree experiments.
//
// Every sample draws from its own generator, seeded from (seed, sample_id)
// only, so results do not depend on evaluation order or worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "farey/farey_algebraic.hpp"
#include "farey/farey_geometric.hpp"

namespace farey {

/// Generator for one sample: std::mt19937_64 seeded through std::seed_seq
/// with the 32-bit halves of (seed, sample_id).
inline std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t sample_id) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(sample_id),
                      std::uint32_t(sample_id >> 32)};
    return std::mt19937_64(seq);
}

enum class component { L, J0, O };

inline component parse_component(const std::string& s) {
    if (s == "L") return component::L;
    if (s == "J0") return component::J0;
    if (s == "O") return component::O;
    throw parse_error("unknown component '" + s + "' (expected L, J0 or O)");
}

/// Haar-random element: coefficients of t^0 .. t^(floor+1) i.i.d. uniform,
/// with t^0 fixed to 0 on L and uniform on F_q^* on J0.
inline laurent_series sample_haar(const field& F, component c, std::int64_t floor, std::mt19937_64& rng) {
    if (floor >= 0) throw precondition_failed("sampling floor must be negative");
    std::uniform_int_distribution<std::uint32_t> any(0, F.q() - 1), unit(1, F.q() - 1);
    std::vector<elem> co(std::size_t(-floor));
    co[0] = c == component::L ? 0 : c == component::J0 ? elem(unit(rng)) : elem(any(rng));
    for (std::size_t j = 1; j < co.size(); ++j) co[j] = elem(any(rng));
    return laurent_series::from_coeffs(F, 0, std::move(co), floor);
}

/// mu_A-random element of O: L with probability q/(2q-1), else J0.
inline laurent_series sample_mu_A(const field& F, std::int64_t floor, std::mt19937_64& rng) {
    std::bernoulli_distribution inL(double(F.q()) / double(2 * F.q() - 1));
    return sample_haar(F, inL(rng) ? component::L : component::J0, floor, rng);
}

/// mu_G-random level: each sign with probability 1/2, |level| geometric.
inline std::int64_t sample_geo_level(const field& F, std::mt19937_64& rng) {
    std::bernoulli_distribution neg(0.5);
    std::geometric_distribution<std::int64_t> g(1.0 - 1.0 / double(F.q()));
    const std::int64_t m = g(rng);
    return neg(rng) ? -m - 1 : m;
}

// ---------------------------------------------------------------------------
// exact invariance by forward enumeration of cylinders

/// A cylinder together with a level (the level is ignored by F_h).
using level_measure = std::function<exact_rational(const cylinder&, std::int64_t)>;

struct invariance_report {
    exact_rational max_discrepancy = 0;
    std::size_t targets = 0;
    std::size_t source_cells = 0;
    std::string worst; ///< target attaining the maximum
};

namespace detail {

inline std::string cell_name(const field& F, const cylinder& c, std::int64_t level, bool with_level) {
    std::string s = "[";
    for (std::size_t j = 0; j < c.coeffs.size(); ++j) s += (j ? "," : "") + F.format(c.coeffs[j]);
    s += "]";
    if (with_level) s += "@" + std::to_string(level);
    return s;
}

inline std::optional<cylinder> image_prefix(const laurent_series& g, std::size_t len) {
    if (len > 0 && !g.known(-std::int64_t(len) + 1)) return std::nullopt;
    cylinder c;
    for (std::size_t j = 0; j < len; ++j) c.coeffs.push_back(g.coeff(-std::int64_t(j)));
    return c;
}

// Pushes the measure of each source cell forward. A source cell is resolved
// when the image of the whole cell lies in one target cell; otherwise it is
// split by one more coefficient.
template <class Step>
invariance_report pushforward(const field& F, std::vector<std::pair<cylinder, std::int64_t>> roots,
                              std::size_t target_len, const std::vector<std::pair<cylinder, std::int64_t>>& targets,
                              const level_measure& mu, Step step, bool with_level, std::size_t budget) {
    std::map<std::pair<std::int64_t, std::vector<elem>>, exact_rational> mass;
    std::set<std::pair<std::int64_t, std::vector<elem>>> wanted;
    for (const auto& [c, n] : targets) wanted.insert({n, c.coeffs});
    invariance_report rep;
    std::vector<std::pair<cylinder, std::int64_t>> stack = std::move(roots);
    while (!stack.empty()) {
        auto [c, n] = std::move(stack.back());
        stack.pop_back();
        if (++rep.source_cells > budget)
            throw depth_infeasible("cylinder refinement exceeded the budget of " + std::to_string(budget) + " cells");
        std::optional<std::pair<cylinder, std::int64_t>> img;
        try {
            img = step(c, n, target_len);
        } catch (const insufficient_precision&) {
        }
        if (!img) {
            for (std::uint32_t a = 0; a < F.q(); ++a) {
                cylinder d = c;
                d.coeffs.push_back(elem(a));
                stack.push_back({std::move(d), n});
            }
            continue;
        }
        const auto key = std::make_pair(img->second, img->first.coeffs);
        if (wanted.count(key)) mass[key] += mu(c, n);
    }
    rep.targets = targets.size();
    for (const auto& [c, n] : targets) {
        const exact_rational want = mu(c, n);
        const auto it = mass.find({n, c.coeffs});
        const exact_rational got = it == mass.end() ? exact_rational(0) : it->second;
        const exact_rational diff = abs(got - want);
        if (diff > rep.max_discrepancy || rep.worst.empty()) {
            if (diff > rep.max_discrepancy) rep.max_discrepancy = diff;
            if (rep.worst.empty() || diff > 0) rep.worst = cell_name(F, c, n, with_level);
        }
    }
    return rep;
}

inline std::vector<cylinder> cylinders_of_O(const field& F, std::size_t len) {
    std::vector<cylinder> out{cylinder{}};
    for (std::size_t j = 0; j < len; ++j) {
        std::vector<cylinder> next;
        for (const auto& c : out)
            for (std::uint32_t a = 0; a < F.q(); ++a) {
                cylinder e = c;
                e.coeffs.push_back(elem(a));
                next.push_back(std::move(e));
            }
        out = std::move(next);
    }
    return out;
}

} // namespace detail

inline level_measure mu_G_measure(const field& F) {
    return [&F](const cylinder& c, std::int64_t n) { return mu_G(F, c, n); };
}

/// Control: the weights of the negative levels are rescaled, which breaks
/// invariance. (q-1)/2 becomes 1, or q-1 when (q-1)/2 is already 1.
inline level_measure mu_G_perturbed(const field& F) {
    return [&F](const cylinder& c, std::int64_t n) {
        exact_rational w = mu_G(F, c, n);
        if (n < 0) {
            const exact_rational half = exact_rational(F.q() - 1) / 2;
            w = w / half * (half == 1 ? exact_rational(F.q() - 1) : exact_rational(1));
        }
        return w;
    };
}

inline level_measure mu_A_measure(const field& F) {
    return [&F](const cylinder& c, std::int64_t) { return mu_A(F, c); };
}

/// Control: plain Haar measure on O.
inline level_measure haar_measure(const field& F) {
    return [&F](const cylinder& c, std::int64_t) { return haar(F, c); };
}

/// max over depth-d cylinders C of L and levels |n| <= levels of
/// |mu(F^-1(C x {n})) - mu(C x {n})|.
inline invariance_report geo_invariance_exact(const field& F, std::size_t depth, std::int64_t levels,
                                              const level_measure& mu, std::size_t budget = 2'000'000) {
    std::vector<std::pair<cylinder, std::int64_t>> targets, roots;
    for (std::int64_t n = -levels; n <= levels; ++n)
        for (const auto& c : cylinders_of_L(F, depth)) targets.push_back({c, n});
    for (std::int64_t m = -levels - 1; m <= levels + 1; ++m) roots.push_back({cylinder{{0}}, m});
    const auto step = [&F](const cylinder& c, std::int64_t n,
                           std::size_t len) -> std::optional<std::pair<cylinder, std::int64_t>> {
        const auto s = geo_step(geo_state<laurent_series>{c.as_series(F), n});
        auto img = detail::image_prefix(s.f, len);
        if (!img) return std::nullopt;
        return std::make_pair(std::move(*img), s.n);
    };
    return detail::pushforward(F, std::move(roots), depth + 1, targets, mu, step, true, budget);
}

/// max over length-(d+1) cylinders C of O of |mu(F_h^-1 C) - mu(C)|.
inline invariance_report alg_invariance_exact(const field& F, const hparam& h, std::size_t depth,
                                              const level_measure& mu, std::size_t budget = 2'000'000) {
    std::vector<std::pair<cylinder, std::int64_t>> targets;
    for (const auto& c : detail::cylinders_of_O(F, depth + 1)) targets.push_back({c, 0});
    const auto step = [&F, &h](const cylinder& c, std::int64_t,
                               std::size_t len) -> std::optional<std::pair<cylinder, std::int64_t>> {
        if (c.coeffs.empty()) return std::nullopt;
        const bool all_zero = std::all_of(c.coeffs.begin(), c.coeffs.end(), [](elem x) { return x == 0; });
        if (all_zero) {
            // every f here has deg f <= -s and lands in deg <= -(s-1)
            if (c.coeffs.size() < len + 1) return std::nullopt;
            return std::make_pair(cylinder{std::vector<elem>(len, 0)}, std::int64_t(0));
        }
        auto img = detail::image_prefix(alg_step_nf(c.as_series(F), h), len);
        if (!img) return std::nullopt;
        return std::make_pair(std::move(*img), std::int64_t(0));
    };
    return detail::pushforward(F, {{cylinder{}, 0}}, depth + 1, targets, mu, step, false, budget);
}

// ---------------------------------------------------------------------------
// Monte Carlo invariance

struct chi2_report {
    double statistic = 0;
    std::size_t dof = 0;
    double p_value = 1;
    double quantile_999 = 0;
    std::size_t samples = 0;
    std::size_t dropped = 0;

    bool below_999() const { return statistic < quantile_999; }
};

/// Pearson statistic of observed counts against expected probabilities
/// (cells with zero expectation must be empty).
inline chi2_report chi_squared_test(const std::vector<std::size_t>& observed, const std::vector<double>& prob) {
    chi2_report r;
    std::size_t N = 0;
    for (auto o : observed) N += o;
    r.samples = N;
    std::size_t cells = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (prob[i] <= 0) {
            if (observed[i] > 0) r.statistic = std::numeric_limits<double>::infinity();
            continue;
        }
        const double e = double(N) * prob[i];
        r.statistic += (double(observed[i]) - e) * (double(observed[i]) - e) / e;
        ++cells;
    }
    r.dof = cells > 1 ? cells - 1 : 1;
    const boost::math::chi_squared_distribution<double> dist(double(r.dof));
    r.quantile_999 = boost::math::quantile(dist, 0.999);
    r.p_value = std::isfinite(r.statistic) ? boost::math::cdf(boost::math::complement(dist, r.statistic)) : 0.0;
    return r;
}

enum class mc_source { invariant, haar };

/// Samples (from mu_A, or from Haar on O as a control), applies F_h once
/// and compares the length-(d+1) cylinder frequencies of the image with mu_A.
inline chi2_report alg_invariance_mc(const field& F, const hparam& h, std::size_t N, std::size_t depth,
                                     std::uint64_t seed, mc_source src = mc_source::invariant,
                                     std::int64_t floor = -48) {
    if (N < 1000) throw precondition_failed("Monte Carlo invariance needs at least 1000 samples");
    const auto cells = detail::cylinders_of_O(F, depth + 1);
    std::map<std::vector<elem>, std::size_t> index;
    std::vector<double> prob;
    for (const auto& c : cells) {
        index[c.coeffs] = prob.size();
        prob.push_back(mu_A(F, c).convert_to<double>());
    }
    std::vector<std::size_t> obs(cells.size(), 0);
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < N; ++i) {
        auto rng = sample_rng(seed, i);
        const laurent_series f = src == mc_source::invariant ? sample_mu_A(F, floor, rng)
                                                             : sample_haar(F, component::O, floor, rng);
        try {
            bool tiny = true; // deg f <= -(d+2) lands in the zero cell, as in the exact tester
            for (std::int64_t j = 0; j <= std::int64_t(depth) + 1; ++j) tiny = tiny && f.coeff(-j) == 0;
            const auto img = tiny ? std::optional<cylinder>(cylinder{std::vector<elem>(depth + 1, 0)})
                                  : detail::image_prefix(alg_step_nf(f, h), depth + 1);
            if (!img) throw insufficient_precision("image too coarse", floor - 1);
            ++obs[index.at(img->coeffs)];
        } catch (const insufficient_precision&) {
            ++dropped;
        }
    }
    chi2_report r = chi_squared_test(obs, prob);
    r.dropped = dropped;
    return r;
}

/// Same for the geometric map and mu_G, over levels |n| <= levels plus one
/// overflow cell.
inline chi2_report geo_invariance_mc(const field& F, std::size_t N, std::size_t depth, std::int64_t levels,
                                     std::uint64_t seed, std::int64_t floor = -48) {
    if (N < 1000) throw precondition_failed("Monte Carlo invariance needs at least 1000 samples");
    const auto cyl = cylinders_of_L(F, depth);
    std::map<std::pair<std::int64_t, std::vector<elem>>, std::size_t> index;
    std::vector<double> prob;
    double inside = 0;
    for (std::int64_t n = -levels; n <= levels; ++n)
        for (const auto& c : cyl) {
            index[{n, c.coeffs}] = prob.size();
            prob.push_back(mu_G(F, c, n).convert_to<double>());
            inside += prob.back();
        }
    prob.push_back(1.0 - inside);
    std::vector<std::size_t> obs(prob.size(), 0);
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < N; ++i) {
        auto rng = sample_rng(seed, i);
        const laurent_series f = sample_haar(F, component::L, floor, rng);
        const std::int64_t n = sample_geo_level(F, rng);
        try {
            const auto s = geo_step(geo_state<laurent_series>{f, n});
            const auto img = detail::image_prefix(s.f, depth + 1);
            if (!img) throw insufficient_precision("image too coarse", floor - 1);
            const auto it = index.find({s.n, img->coeffs});
            ++obs[it == index.end() ? prob.size() - 1 : it->second];
        } catch (const insufficient_precision&) {
            ++dropped;
        }
    }
    chi2_report r = chi_squared_test(obs, prob);
    r.dropped = dropped;
    return r;
}

// ---------------------------------------------------------------------------
// experiments

struct experiment_config {
    std::uint32_t q = 2;
    std::string map = "alg";
    std::string h = "t^-1";
    std::size_t samples = 1000;
    std::size_t ell = 500;
    std::optional<std::int64_t> floor; ///< default derived from ell
    std::uint64_t seed = 1;
};

inline double rate_target(std::uint32_t q) { return -2.0 * q / (2.0 * q - 1.0); }
inline double degree_target(std::uint32_t q) { return double(q) / double(q - 1); }

struct rate_sample {
    std::size_t sample_id = 0;
    std::optional<double> rate; ///< (1/l) log_q |f - U_l/V_l|
    bool terminated = false;
    bool dropped = false;
};

struct rate_report {
    std::vector<rate_sample> samples;
    double mean = 0, sd = 0, target = 0;
    std::size_t used = 0, terminated = 0, dropped = 0;
};

/// Floor that leaves room for l steps of F_h: the orbit position needs
/// about l/2 partial quotients, each certified by the Legendre criterion.
inline std::int64_t default_rate_floor(std::size_t ell) { return -3 * std::int64_t(ell) - 64; }

/// One sample of the rate experiment. (U_l, V_l) is the first column of
/// M_h(f) ... M_h(F_h^(l-1) f), read off the closed form; the error is
/// |V f - U| / |V| with the certified series.
inline rate_sample rate_one(const field& F, const hparam& h, std::size_t ell, std::int64_t floor, std::uint64_t seed,
                            std::size_t id) {
    rate_sample out{id, std::nullopt, false, false};
    auto rng = sample_rng(seed, id);
    const laurent_series f = sample_haar(F, component::L, floor, rng);
    try {
        const cf_expansion cf = cf_expand(f, ell / 2 + 2);
        const pmat M = alg_closed_form(cf, h, std::int64_t(ell));
        const qpow err = approx_error(f, M.a, M.c);
        if (err.zero) {
            out.terminated = true;
            return out;
        }
        out.rate = double(err.exponent) / double(ell);
    } catch (const depth_exceeded&) {
        out.terminated = true; // the orbit reached 0 before step l
    } catch (const insufficient_precision&) {
        out.dropped = true;
    }
    return out;
}

inline void summarize(rate_report& r) {
    double s = 0, s2 = 0;
    for (const auto& x : r.samples) {
        if (x.terminated) ++r.terminated;
        if (x.dropped) ++r.dropped;
        if (x.rate) {
            ++r.used;
            s += *x.rate;
            s2 += *x.rate * *x.rate;
        }
    }
    if (r.used) {
        r.mean = s / double(r.used);
        r.sd = r.used > 1 ? std::sqrt(std::max(0.0, (s2 - double(r.used) * r.mean * r.mean) / double(r.used - 1))) : 0;
    }
}

inline rate_report rate_experiment(const field& F, const hparam& h, std::size_t samples, std::size_t ell,
                                   std::uint64_t seed, std::optional<std::int64_t> floor = std::nullopt) {
    if (ell == 0) throw precondition_failed("orbit length must be positive");
    const std::int64_t fl = floor.value_or(default_rate_floor(ell));
    if (fl > -std::int64_t(ell)) throw precondition_failed("floor too shallow for the orbit length");
    rate_report r;
    r.target = rate_target(F.q());
    for (std::size_t i = 0; i < samples; ++i) r.samples.push_back(rate_one(F, h, ell, fl, seed, i));
    summarize(r);
    return r;
}

struct degree_report {
    std::size_t k = 0;
    std::vector<double> mean_cumulative; ///< mean over samples of sum_{n<=j} deg A_n / j, j = 1..k
    std::vector<double> mean_next_ratio; ///< mean of deg A_{j+1} / j, j = 1..k
    std::vector<double> max_next_ratio;  ///< max over samples of deg A_{j+1} / j
    std::map<std::int64_t, std::size_t> histogram; ///< deg A_n over all n <= k and samples
    std::size_t used = 0, dropped = 0;
    double target = 0;

    double final_mean() const { return mean_cumulative.empty() ? 0 : mean_cumulative.back(); }
};

inline std::int64_t default_degree_floor(std::uint32_t q, std::size_t k) {
    // 2 deg Q_{k+1} ~ 2 (k+1) q/(q-1); leave a generous margin
    return -std::int64_t(3 * (k + 1) * q / (q - 1)) - 64;
}

inline degree_report degree_stats(const field& F, std::size_t samples, std::size_t k, std::uint64_t seed,
                                  std::optional<std::int64_t> floor = std::nullopt) {
    const std::int64_t fl = floor.value_or(default_degree_floor(F.q(), k));
    degree_report r;
    r.k = k;
    r.target = degree_target(F.q());
    r.mean_cumulative.assign(k, 0);
    r.mean_next_ratio.assign(k, 0);
    r.max_next_ratio.assign(k, 0);
    for (std::size_t i = 0; i < samples; ++i) {
        auto rng = sample_rng(seed, i);
        const laurent_series f = sample_haar(F, component::L, fl, rng);
        try {
            const cf_expansion cf = cf_expand(f, k + 1);
            cf.require(k + 1);
            double cum = 0;
            for (std::size_t j = 1; j <= k; ++j) {
                const auto d = cf.A(std::int64_t(j)).degree();
                ++r.histogram[d];
                cum += double(d);
                r.mean_cumulative[j - 1] += cum / double(j);
                const double nx = double(cf.A(std::int64_t(j) + 1).degree()) / double(j);
                r.mean_next_ratio[j - 1] += nx;
                r.max_next_ratio[j - 1] = std::max(r.max_next_ratio[j - 1], nx);
            }
            ++r.used;
        } catch (const error&) {
            ++r.dropped;
        }
    }
    if (r.used)
        for (std::size_t j = 0; j < k; ++j) {
            r.mean_cumulative[j] /= double(r.used);
            r.mean_next_ratio[j] /= double(r.used);
        }
    return r;
}

// ---------------------------------------------------------------------------
// output

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string run_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

inline std::string format_double(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

inline std::string rate_csv(const rate_report& r, std::uint32_t q, const std::string& map, std::size_t ell) {
    std::ostringstream os;
    os << "sample_id,q,map,ell,rate,terminated,dropped\n";
    for (const auto& s : r.samples)
        os << s.sample_id << ',' << q << ',' << map << ',' << ell << ',' << (s.rate ? format_double(*s.rate) : "")
           << ',' << (s.terminated ? 1 : 0) << ',' << (s.dropped ? 1 : 0) << '\n';
    return os.str();
}

} // namespace farey
