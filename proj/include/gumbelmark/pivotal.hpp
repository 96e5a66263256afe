#pragma once

#include <span>
#include <vector>

#include "gumbelmark/prf.hpp"
#include "gumbelmark/tokensource.hpp"
#include "gumbelmark/watermark.hpp"

namespace gumbelmark {

/// Pivotal statistics Y_t and their p-values p_t = 1 - Y_t.
struct PivotSeries {
    std::vector<double> y;
    std::vector<double> p;

    PivotSeries() = default;
    explicit PivotSeries(std::vector<double> pivots);

    std::size_t size() const noexcept { return y.size(); }
};

/// Y_t = prf_uniform(key, tokens[t-m..t-1], tokens[t]) for every t >= m.
PivotSeries pivot_series(const TokenSeq& seq, const Key& key, std::uint32_t vocab_size);

/// Law of the watermarked pivot under a known NTP distribution:
/// F(r) = sum_w P_w r^(1/P_w), f(r) = sum_w r^(1/P_w - 1).
///
/// Equal probabilities are grouped and terms are summed from the largest
/// probability down, stopping once the remaining mass cannot move the sum.
class AltLaw {
public:
    explicit AltLaw(const NtpDist& p);

    double cdf(double r) const;
    double pdf(double r) const;
    /// Solves cdf(r) = u by bisection; |r - r*| <= 1e-12.
    double sample(double u) const;

    bool degenerate() const noexcept { return groups_.size() == 1 && groups_[0].count == 1; }

private:
    struct Group {
        double prob;
        double count;
        double tail_count;  // atoms in this and all later groups
        double tail_mass;   // probability in this and all later groups
    };
    std::vector<Group> groups_;
};

double alt_cdf(const NtpDist& p, double r);
double alt_pdf(const NtpDist& p, double r);
double alt_sample(const NtpDist& p, double u);

}  // namespace gumbelmark
