#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <sumtrunc/sumtrunc.hpp>

#include "oracles.hpp"

using namespace sumtrunc;
using Catch::Matchers::ContainsSubstring;

namespace {

// Tightly truncated sum of a catalog series, for comparisons against
// independently computed anchor values.
LogValue tight_sum(const std::string& id, const Params& params,
                   std::uint64_t max_terms = 400000) {
    TruncationConfig config;
    config.method = Method::Auto;
    config.max_terms = max_terms;
    const TruncationResult result = truncate(make_series(id, params), config);
    REQUIRE(result.converged);
    return result.log_sum;
}

// Observed term ratio a_{n+1} / a_n at absolute index n.
double measured_ratio(const SeriesSpec& series, std::uint64_t n) {
    const LogValue a = series.log_term(n);
    const LogValue b = series.log_term(n + 1);
    REQUIRE_FALSE(a.is_zero());
    REQUIRE_FALSE(b.is_zero());
    return std::exp(b.log() - a.log());
}

}  // namespace

TEST_CASE("catalog lists every series with usable metadata") {
    const std::vector<std::string> expected = {
        "comp",           "comp_reparam",   "double_poisson",
        "power_geometric", "poisson_fact_moment", "negbin_marginal",
        "sentinel_rho0",  "erlang_full",    "bessel_i",
        "telescoping"};
    const auto& entries = catalog();
    REQUIRE(entries.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(entries[i].id == expected[i]);
        CHECK_FALSE(entries[i].description.empty());
        CHECK(static_cast<bool>(entries[i].build));
        CHECK(static_cast<bool>(entries[i].closed_form));
    }
    CHECK(catalog_lookup("comp").id == "comp");

    // sentinel_rho0 takes one required parameter and three optional ones so a
    // caller can pick the Poisson or the negative binomial cluster-size law.
    const CatalogEntry& sentinel = catalog_lookup("sentinel_rho0");
    std::size_t required = 0;
    for (const auto& spec : sentinel.params) required += spec.required ? 1 : 0;
    CHECK(required == 1);
    CHECK(sentinel.params.size() == 4);
}

TEST_CASE("unknown series names are rejected with the known ids listed") {
    CHECK_THROWS_AS(catalog_lookup("nope"), config_error);
    CHECK_THROWS_WITH(catalog_lookup("nope"),
                      ContainsSubstring("unknown series 'nope'; known series:"));
    CHECK_THROWS_WITH(catalog_lookup("nope"), ContainsSubstring("comp"));
    CHECK_THROWS_WITH(catalog_lookup("nope"), ContainsSubstring("telescoping"));
    CHECK_THROWS_AS(make_series("", {}), config_error);
}

TEST_CASE("closed forms agree with the extended-precision reference sum") {
    struct ClosedCase {
        const char* id;
        Params params;
    };
    const std::vector<ClosedCase> cases = {
        {"comp", {{"mu", 5.0}, {"nu", 1.0}}},
        {"comp", {{"mu", 0.5}, {"nu", 1.0}}},
        {"comp", {{"mu", 12.0}, {"nu", 1.0}}},
        {"comp", {{"mu", 10.0}, {"nu", 2.0}}},
        {"comp", {{"mu", 2.5}, {"nu", 2.0}}},
        {"comp_reparam", {{"mu", 5.0}, {"nu", 1.0}}},
        {"comp_reparam", {{"mu", 10.0}, {"nu", 2.0}}},
        {"comp_reparam", {{"mu", 0.05}, {"nu", 2.0}}},
        {"double_poisson", {{"mu", 2.0}, {"phi", 1.0}}},
        {"double_poisson", {{"mu", 5.0}, {"phi", 1.0}}},
        {"double_poisson", {{"mu", 0.5}, {"phi", 1.0}}},
        {"power_geometric", {{"a", 2.0}}},
        {"power_geometric", {{"a", 4.0}}},
        {"power_geometric", {{"a", 10.0}}},
        {"power_geometric", {{"a", 1.1}}},
        {"power_geometric", {{"a", 1.01}}},
        {"power_geometric", {{"a", 1.0 / 0.6}}},
        {"power_geometric", {{"a", 1.0 / 0.75}}},
        {"power_geometric", {{"a", 1.0 / 0.9}}},
        {"poisson_fact_moment", {{"lambda", 10.0}, {"r", 2.0}}},
        {"poisson_fact_moment", {{"lambda", 0.5}, {"r", 5.0}}},
        {"poisson_fact_moment", {{"lambda", 3.5}, {"r", 0.0}}},
        {"poisson_fact_moment", {{"lambda", 3.5}, {"r", 1.0}}},
        {"poisson_fact_moment", {{"lambda", 0.2}, {"r", 3.0}}},
        {"negbin_marginal",
         {{"mu", 10.0}, {"phi", 0.5}, {"eta", 0.3}, {"x", 5.0}}},
        {"negbin_marginal",
         {{"mu", 3.0}, {"phi", 1.5}, {"eta", 0.4}, {"x", 2.0}}},
        {"negbin_marginal",
         {{"mu", 1.0}, {"phi", 10.0}, {"eta", 0.7}, {"x", 0.0}}},
        {"sentinel_rho0", {{"eta", 0.3}, {"lambda", 2.5}}},
        {"sentinel_rho0", {{"eta", 0.9}, {"lambda", 0.4}}},
        {"sentinel_rho0", {{"eta", 0.25}, {"mu", 3.0}, {"phi", 2.0}}},
        {"sentinel_rho0", {{"eta", 0.6}, {"mu", 8.0}, {"phi", 0.5}}},
        {"erlang_full", {{"x", 2.0}, {"mu", 3.0}, {"beta", 1.5}}},
        {"erlang_full", {{"x", 0.5}, {"mu", 1.0}, {"beta", 2.0}}},
        {"erlang_full", {{"x", 120.0}, {"mu", 15.0}, {"beta", 0.1}}},
        {"bessel_i", {{"v", 0.0}, {"z", 20.0}}},
        {"bessel_i", {{"v", 1.0}, {"z", 2.0 * std::sqrt(180.0)}}},
        {"bessel_i", {{"v", 2.5}, {"z", 10.0}}},
        {"bessel_i", {{"v", 0.0}, {"z", 0.1}}},
    };
    for (const auto& c : cases) {
        CAPTURE(c.id, c.params);
        const std::optional<LogValue> cf = closed_form(c.id, c.params);
        REQUIRE(cf.has_value());
        const LogValue ref = reference_sum(make_series(c.id, c.params));
        const double tol = 1e-13 * std::max(1.0, std::fabs(cf->log()));
        CHECK(std::fabs(cf->log() - ref.log()) <= tol);
    }
}

TEST_CASE("closed form is absent where no analytic sum is exposed") {
    CHECK_FALSE(closed_form("comp", {{"mu", 10.0}, {"nu", 0.1}}).has_value());
    CHECK_FALSE(closed_form("comp", {{"mu", 3.0}, {"nu", 3.0}}).has_value());
    CHECK_FALSE(closed_form("comp_reparam", {{"mu", 10.0}, {"nu", 0.5}}).has_value());
    CHECK_FALSE(closed_form("double_poisson", {{"mu", 5.0}, {"phi", 2.0}}).has_value());
    // Bessel arguments past the guard rail fall back to series evaluation.
    CHECK_FALSE(closed_form("bessel_i", {{"v", 0.0}, {"z", 601.0}}).has_value());
    CHECK_FALSE(closed_form("bessel_i", {{"v", 1.0}, {"z", 3000.0}}).has_value());
    CHECK_FALSE(closed_form("comp", {{"mu", 1e6}, {"nu", 2.0}}).has_value());
    CHECK_FALSE(
        closed_form("erlang_full", {{"x", 15000.0}, {"mu", 1500.0}, {"beta", 0.1}})
            .has_value());
    // telescoping sums to exactly 1.
    const auto tele = closed_form("telescoping", {});
    REQUIRE(tele.has_value());
    CHECK(tele->log() == 0.0);
}

TEST_CASE("truncated catalog sums match independently computed anchors") {
    struct AnchorCase {
        const char* id;
        Params params;
        double anchor;
        double tol;  // absolute tolerance on the log scale
    };
    const std::vector<AnchorCase> cases = {
        {"comp", {{"mu", 10.0}, {"nu", 0.5}}, oracle::log_z_comp_10_0p5, 1e-13},
        {"comp", {{"mu", 5.0}, {"nu", 1.5}}, oracle::log_z_comp_5_1p5, 1e-13},
        {"comp", {{"mu", 10.0}, {"nu", 2.0}}, oracle::log_z_comp_10_2, 1e-13},
        {"comp_reparam", {{"mu", 10.0}, {"nu", 0.1}}, oracle::log_zt_comp_10_0p1, 1e-13},
        {"comp_reparam", {{"mu", 100.0}, {"nu", 0.01}}, oracle::log_zt_comp_100_0p01, 1e-13},
        {"comp_reparam", {{"mu", 10.0}, {"nu", 2.0}}, oracle::log_zt_comp_10_2, 1e-13},
        {"double_poisson", {{"mu", 5.0}, {"phi", 0.5}}, oracle::log_dp_5_0p5, 1e-13},
        {"double_poisson", {{"mu", 2.0}, {"phi", 1.0}}, oracle::log_dp_2_1, 1e-13},
        {"double_poisson", {{"mu", 0.5}, {"phi", 2.0}}, oracle::log_dp_0p5_2, 1e-13},
        {"poisson_fact_moment", {{"lambda", 10.0}, {"r", 2.0}}, oracle::log_pfm_lam10_r2, 1e-13},
        {"poisson_fact_moment", {{"lambda", 0.5}, {"r", 5.0}}, oracle::log_pfm_lam0p5_r5, 1e-13},
        {"negbin_marginal",
         {{"mu", 10.0}, {"phi", 0.5}, {"eta", 0.3}, {"x", 5.0}},
         oracle::log_nb_marginal_series, 1e-13},
        {"erlang_full",
         {{"x", 2.0}, {"mu", 3.0}, {"beta", 1.5}},
         oracle::log_erlang_x2_mu3_b1p5, 1e-13},
        {"erlang_full",
         {{"x", 0.5}, {"mu", 1.0}, {"beta", 2.0}},
         oracle::log_erlang_x0p5_mu1_b2, 1e-13},
        {"erlang_full",
         {{"x", 120.0}, {"mu", 15.0}, {"beta", 0.1}},
         oracle::log_erlang_x120_mu15_b0p1, 1e-12},
        // z = 2.25e6: the term logs are differences of numbers near 2e4, so
        // each carries a few ulps of that magnitude (~1e-11).
        {"erlang_full",
         {{"x", 15000.0}, {"mu", 1500.0}, {"beta", 0.1}},
         oracle::log_erlang_x15000_mu1500_b0p1, 1e-10},
        {"bessel_i", {{"v", 0.0}, {"z", 2.0 * std::sqrt(10.0)}}, oracle::log_i0_2sqrt10, 1e-13},
        {"bessel_i", {{"v", 0.0}, {"z", 20.0}}, oracle::log_i0_20, 1e-13},
        {"bessel_i", {{"v", 1.0}, {"z", 2.0 * std::sqrt(180.0)}}, oracle::log_i1_2sqrt180, 1e-13},
        {"bessel_i", {{"v", 2.5}, {"z", 10.0}}, oracle::log_i2p5_10, 1e-13},
        {"bessel_i", {{"v", 0.0}, {"z", 0.1}}, oracle::log_i0_0p1, 1e-13},
        // Large arguments: term logs are built from numbers of size ~600 and
        // ~6000 respectively, scaling the attainable agreement.
        {"bessel_i", {{"v", 0.0}, {"z", 600.0}}, oracle::log_i0_600, 1e-12},
        {"bessel_i", {{"v", 1.0}, {"z", 3000.0}}, oracle::log_i1_3000, 5e-12},
    };
    for (const auto& c : cases) {
        CAPTURE(c.id, c.params, c.anchor);
        const LogValue sum = tight_sum(c.id, c.params);
        CHECK(std::fabs(sum.log() - c.anchor) <= c.tol);
    }

    // Identity linking two entries: the reparameterized normalizer at nu = 2
    // is the same function as I0 at twice the rate.
    const LogValue z10 = tight_sum("comp", {{"mu", 10.0}, {"nu", 2.0}});
    const LogValue i0 = tight_sum("bessel_i", {{"v", 0.0}, {"z", 2.0 * std::sqrt(10.0)}});
    CHECK(std::fabs(z10.log() - i0.log()) <= 1e-13);
}

TEST_CASE("term ratios approach the declared limit from the declared side") {
    struct RatioCase {
        const char* id;
        Params params;
    };
    const std::vector<RatioCase> cases = {
        {"comp", {{"mu", 5.0}, {"nu", 1.5}}},
        {"comp_reparam", {{"mu", 3.0}, {"nu", 2.0}}},
        {"double_poisson", {{"mu", 2.0}, {"phi", 1.5}}},
        {"power_geometric", {{"a", 2.0}}},
        {"power_geometric", {{"a", 1.1}}},
        {"poisson_fact_moment", {{"lambda", 3.5}, {"r", 2.0}}},
        {"negbin_marginal", {{"mu", 10.0}, {"phi", 0.5}, {"eta", 0.3}, {"x", 5.0}}},
        {"negbin_marginal", {{"mu", 3.0}, {"phi", 0.5}, {"eta", 0.5}, {"x", 0.0}}},
        {"sentinel_rho0", {{"eta", 0.3}, {"lambda", 2.5}}},
        {"sentinel_rho0", {{"eta", 0.25}, {"mu", 3.0}, {"phi", 2.0}}},
        {"sentinel_rho0", {{"eta", 0.25}, {"mu", 3.0}, {"phi", 0.5}}},
        {"erlang_full", {{"x", 2.0}, {"mu", 3.0}, {"beta", 1.5}}},
        {"bessel_i", {{"v", 2.5}, {"z", 10.0}}},
        {"telescoping", {}},
    };
    for (const auto& c : cases) {
        CAPTURE(c.id, c.params);
        const SeriesSpec series = make_series(c.id, c.params);
        REQUIRE(series.ratio_limit.has_value());
        const double limit = *series.ratio_limit;
        REQUIRE(series.ratio_direction != RatioDirection::Unknown);
        const double near = measured_ratio(series, series.index_offset + 100);
        const double far = measured_ratio(series, series.index_offset + 10000);
        CHECK(std::fabs(far - limit) <= 1e-2);
        // The far ratio must not sit farther from the limit than the near one.
        CHECK(std::fabs(far - limit) <= std::fabs(near - limit) + 1e-15);
        if (series.ratio_direction == RatioDirection::DecreasesToLimit) {
            CHECK(near >= far - 1e-15);
            CHECK(far >= limit - 1e-12);
        } else {
            CHECK(near <= far + 1e-15);
            CHECK(far <= limit + 1e-12);
        }
    }
}

TEST_CASE("thinning scales the cluster-size ratio limit by one minus eta") {
    const double mu = 4.0;
    const double phi = 1.25;
    const double base = mu / (mu + phi);
    for (const double eta : {0.2, 0.5, 0.9}) {
        const SeriesSpec series = make_series(
            "negbin_marginal", {{"mu", mu}, {"phi", phi}, {"eta", eta}, {"x", 3.0}});
        REQUIRE(series.ratio_limit.has_value());
        CHECK(*series.ratio_limit == base * (1.0 - eta));
        CHECK(std::fabs(measured_ratio(series, 20000) - *series.ratio_limit) <= 1e-3);
    }
    // Empirically: the geometric thinning factor is the only part of the term
    // ratio that depends on eta, so it divides out up to the rounding of the
    // term logs themselves (magnitude ~1e4 here, so a few ulps of that).
    const SeriesSpec a = make_series(
        "negbin_marginal", {{"mu", mu}, {"phi", phi}, {"eta", 0.2}, {"x", 3.0}});
    const SeriesSpec b = make_series(
        "negbin_marginal", {{"mu", mu}, {"phi", phi}, {"eta", 0.5}, {"x", 3.0}});
    const double ratio_of_ratios =
        measured_ratio(a, 20000) / measured_ratio(b, 20000);
    CHECK(std::fabs(ratio_of_ratios - 0.8 / 0.5) <= 1e-10);

    // The same composition drives the sentinel series with an NB cluster law.
    const SeriesSpec s = make_series(
        "sentinel_rho0", {{"eta", 0.4}, {"mu", mu}, {"phi", phi}});
    REQUIRE(s.ratio_limit.has_value());
    CHECK(*s.ratio_limit == base * (1.0 - 0.4));
}

TEST_CASE("parameter maps are validated with precise error messages") {
    CHECK_THROWS_AS(make_series("comp", {{"q", 1.0}}), config_error);
    CHECK_THROWS_WITH(make_series("comp", {{"q", 1.0}}),
                      ContainsSubstring("unknown parameter 'q' for series 'comp'"));
    CHECK_THROWS_WITH(make_series("comp", {{"mu", 5.0}}),
                      ContainsSubstring("series 'comp' requires parameter 'nu'"));
    const double inf = std::numeric_limits<double>::infinity();
    const double nan = std::nan("");
    CHECK_THROWS_WITH(
        make_series("comp", {{"mu", inf}, {"nu", 1.0}}),
        ContainsSubstring("parameter 'mu' for series 'comp' must be finite"));
    CHECK_THROWS_AS(make_series("comp", {{"mu", 5.0}, {"nu", nan}}), config_error);
    CHECK_THROWS_WITH(make_series("comp", {{"mu", -2.0}, {"nu", 1.0}}),
                      ContainsSubstring("comp: mu must be > 0"));
    CHECK_THROWS_WITH(make_series("comp", {{"mu", 2.0}, {"nu", 0.0}}),
                      ContainsSubstring("comp: nu must be > 0"));
    CHECK_THROWS_WITH(
        make_series("telescoping", {{"a", 2.0}}),
        ContainsSubstring("unknown parameter 'a' for series 'telescoping'"));

    CHECK_THROWS_WITH(make_series("power_geometric", {{"a", 1.0}}),
                      ContainsSubstring("power_geometric: a must be > 1"));

    CHECK_THROWS_WITH(
        make_series("poisson_fact_moment", {{"lambda", 2.0}, {"r", 2.5}}),
        ContainsSubstring("parameter 'r' must be a non-negative integer"));
    CHECK_THROWS_AS(make_series("poisson_fact_moment", {{"lambda", 2.0}, {"r", -1.0}}),
                    config_error);
    CHECK_THROWS_AS(make_series("poisson_fact_moment", {{"lambda", 0.0}, {"r", 1.0}}),
                    config_error);

    const Params nb_base = {{"mu", 3.0}, {"phi", 1.5}, {"eta", 0.4}, {"x", 2.0}};
    auto with = [&nb_base](const std::string& key, double value) {
        Params p = nb_base;
        p[key] = value;
        return p;
    };
    CHECK_THROWS_WITH(make_series("negbin_marginal", with("eta", 0.0)),
                      ContainsSubstring("negbin_marginal: eta must lie in (0, 1]"));
    CHECK_THROWS_AS(make_series("negbin_marginal", with("eta", 1.2)), config_error);
    CHECK_THROWS_WITH(make_series("negbin_marginal", with("x", 3.5)),
                      ContainsSubstring("parameter 'x' must be a non-negative integer"));
    CHECK_THROWS_AS(make_series("negbin_marginal", with("mu", 0.0)), config_error);
    CHECK_THROWS_AS(make_series("negbin_marginal", with("phi", -1.0)), config_error);

    CHECK_THROWS_WITH(
        make_series("sentinel_rho0", {{"eta", 0.3}, {"lambda", 2.0}, {"mu", 1.0}}),
        ContainsSubstring("provide either lambda or both mu and phi"));
    CHECK_THROWS_WITH(
        make_series("sentinel_rho0", {{"eta", 0.3}}),
        ContainsSubstring("provide either lambda or both mu and phi"));
    CHECK_THROWS_WITH(make_series("sentinel_rho0", {{"eta", 0.3}, {"mu", 1.0}}),
                      ContainsSubstring("missing parameter 'phi'"));
    CHECK_THROWS_AS(make_series("sentinel_rho0", {{"eta", 0.3}, {"lambda", -1.0}}),
                    config_error);
    CHECK_THROWS_AS(make_series("sentinel_rho0", {{"eta", 0.0}, {"lambda", 1.0}}),
                    config_error);

    CHECK_THROWS_WITH(
        make_series("erlang_full", {{"x", 0.0}, {"mu", 3.0}, {"beta", 1.5}}),
        ContainsSubstring("erlang_full: x must be > 0"));
    CHECK_THROWS_AS(
        make_series("erlang_full", {{"x", 1.0}, {"mu", -3.0}, {"beta", 1.5}}),
        config_error);
    CHECK_THROWS_AS(
        make_series("erlang_full", {{"x", 1.0}, {"mu", 3.0}, {"beta", 0.0}}),
        config_error);

    CHECK_THROWS_WITH(make_series("bessel_i", {{"v", -0.5}, {"z", 1.0}}),
                      ContainsSubstring("bessel_i: v must be >= 0"));
    CHECK_THROWS_AS(make_series("bessel_i", {{"v", 0.0}, {"z", 0.0}}), config_error);
}

TEST_CASE("series with an index offset report zero terms below it") {
    const SeriesSpec pfm = make_series("poisson_fact_moment",
                                       {{"lambda", 3.5}, {"r", 2.0}});
    CHECK(pfm.index_offset == 2);
    CHECK(pfm.log_term(0).is_zero());
    CHECK(pfm.log_term(1).is_zero());
    CHECK_FALSE(pfm.log_term(2).is_zero());

    const SeriesSpec erl = make_series("erlang_full",
                                       {{"x", 2.0}, {"mu", 3.0}, {"beta", 1.5}});
    CHECK(erl.index_offset == 1);
    CHECK(erl.log_term(0).is_zero());
    CHECK_FALSE(erl.log_term(1).is_zero());
}

TEST_CASE("eta = 1 collapses the thinned marginal to its first term") {
    const Params params = {{"mu", 3.0}, {"phi", 1.5}, {"eta", 1.0}, {"x", 2.0}};
    const SeriesSpec series = make_series("negbin_marginal", params);
    CHECK_FALSE(series.log_term(0).is_zero());
    CHECK(series.log_term(1).is_zero());
    CHECK(series.log_term(50).is_zero());
    const auto cf = closed_form("negbin_marginal", params);
    REQUIRE(cf.has_value());
    // Single surviving term: reference summation collapses to that term, and
    // the closed form is the same pmf expression evaluated at eta * mu = mu.
    const LogValue ref = reference_sum(series);
    CHECK(std::fabs(ref.log() - cf->log()) <= 1e-15);
}

TEST_CASE("reference summation handles edge cases") {
    SeriesSpec no_term;
    CHECK_THROWS_WITH(reference_sum(no_term),
                      ContainsSubstring("series has no term function"));

    SeriesSpec zeros;
    zeros.log_term = [](std::uint64_t) { return log_zero(); };
    CHECK(reference_sum(zeros, 1000).is_zero());

    // A trimmed reference matches the fixed-cap rule over the same terms.
    const SeriesSpec pg = make_series("power_geometric", {{"a", 2.0}});
    const LogValue ref50 = reference_sum(pg, 50);
    TruncationConfig cap_config;
    cap_config.method = Method::FixedCap;
    cap_config.cap_k = 49;
    const TruncationResult capped = truncate(pg, cap_config);
    CHECK(std::fabs(ref50.log() - capped.log_sum.log()) <= 5e-15);

    // Starving the reference of terms leaves it strictly below the full sum.
    const SeriesSpec slow = make_series("power_geometric", {{"a", 1.01}});
    const LogValue starved = reference_sum(slow, 10);
    const auto cf = closed_form("power_geometric", {{"a", 1.01}});
    REQUIRE(cf.has_value());
    CHECK(starved.log() < cf->log());

    // The telescoping series sums to exactly 1; two million reference terms
    // land within the leftover tail of about 5e-7.
    const LogValue tele = reference_sum(make_series("telescoping", {}));
    CHECK(std::fabs(tele.linear() - 1.0) <= 1e-6);
    CHECK(tele.linear() < 1.0);
}
