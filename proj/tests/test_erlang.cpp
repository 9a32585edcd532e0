#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include <sumtrunc/sumtrunc.hpp>

#include "oracles.hpp"

using namespace sumtrunc;
using Catch::Matchers::ContainsSubstring;

namespace {

const ErlangTruncation kTight = ErlangTruncation::adaptive(
    std::numeric_limits<double>::epsilon());

double loglik(double x, double mu, double beta,
              ErlangRepresentation rep = ErlangRepresentation::Full,
              const ErlangTruncation& trunc = kTight) {
    const std::vector<double> data{x};
    const ErlangLoglik out = erlang_marginal_loglik(data, mu, beta, rep, trunc);
    REQUIRE(out.converged);
    return out.value;
}

// Tightly truncated reduced primitive (0 -> G, 1 -> C, 2 -> D2), linear scale.
double primitive(double z, int weight_power) {
    TruncationConfig config;
    config.method = Method::SumToThreshold;
    const TruncationResult result =
        truncate(detail::erlang_reduced_series(std::log(z), weight_power), config);
    REQUIRE(result.converged);
    return result.log_sum.linear();
}

}  // namespace

TEST_CASE("marginal log-density matches independently computed anchors") {
    struct Anchor {
        double x, mu, beta, value, tol;
    };
    const std::vector<Anchor> anchors = {
        {2.0, 3.0, 1.5, oracle::log_erlang_x2_mu3_b1p5, 1e-13},
        {0.5, 1.0, 2.0, oracle::log_erlang_x0p5_mu1_b2, 1e-13},
        {120.0, 15.0, 0.1, oracle::log_erlang_x120_mu15_b0p1, 1e-12},
        // z = 2.25e6: term logs are differences of numbers near 2e4, so each
        // carries a few ulps of that magnitude.
        {15000.0, 1500.0, 0.1, oracle::log_erlang_x15000_mu1500_b0p1, 1e-10},
    };
    for (const Anchor& a : anchors) {
        CAPTURE(a.x, a.mu, a.beta);
        CHECK(std::fabs(loglik(a.x, a.mu, a.beta, ErlangRepresentation::Full) - a.value)
              <= a.tol);
        CHECK(std::fabs(loglik(a.x, a.mu, a.beta, ErlangRepresentation::Bessel) - a.value)
              <= a.tol);
    }
}

TEST_CASE("full and Bessel representations agree across the design grid") {
    for (const double mu : {15.0, 150.0, 1500.0}) {
        const double beta = 0.1;
        // Typical duration: a cluster of ~mu events, each with mean 1/beta.
        for (const double scale : {0.3, 1.0, 2.5}) {
            const double x = scale * mu / beta;
            CAPTURE(mu, x);
            const double full = loglik(x, mu, beta, ErlangRepresentation::Full);
            const double bessel = loglik(x, mu, beta, ErlangRepresentation::Bessel);
            CHECK(std::fabs(full - bessel) <= 1e-8 * std::fabs(full));
        }
    }
}

TEST_CASE("log-likelihood is additive over observations") {
    const std::vector<double> xs{2.0, 7.5, 31.0};
    const double mu = 4.0, beta = 0.8;
    double sum = 0.0;
    for (const double x : xs) sum += loglik(x, mu, beta);
    const ErlangLoglik joint = erlang_marginal_loglik(xs, mu, beta,
                                                      ErlangRepresentation::Full, kTight);
    CHECK(joint.value == sum);  // same additions in the same order
    CHECK(joint.n_evaluations > 0);
}

TEST_CASE("reduced primitives match anchors and satisfy D2 = C + zG") {
    const double z = 0.9;
    const double g = primitive(z, 0);
    const double c = primitive(z, 1);
    const double d2 = primitive(z, 2);
    CHECK(std::fabs(g - oracle::gred_0p9) <= 1e-13);
    CHECK(std::fabs(c - oracle::cred_0p9) <= 1e-13);
    CHECK(std::fabs(d2 - oracle::d2red_0p9) <= 1e-13);
    CHECK(std::fabs(c / g - oracle::rc_0p9) <= 1e-13);
    CHECK(std::fabs(d2 / g - oracle::rd2_0p9) <= 1e-13);
    // n^2 = n(n-1) + n turns the D2 series into C plus z times a shifted G.
    CHECK(std::fabs((d2 / g - c / g) - z) <= 1e-12);

    // The same identity at a larger argument, where the series is longer.
    const double z2 = 180.0;
    CHECK(std::fabs((primitive(z2, 2) - primitive(z2, 1)) / primitive(z2, 0) - z2)
          <= 1e-9);
}

TEST_CASE("analytic gradient and Hessian match anchors at a single observation") {
    const std::vector<double> data{2.0};
    const ErlangHessianResult h = erlang_hessian(data, 3.0, 1.5, kTight);
    REQUIRE(h.converged);
    CHECK(std::fabs(h.grad_mu - oracle::erlang_grad_mu_x2) <= 1e-12);
    CHECK(std::fabs(h.grad_beta - oracle::erlang_grad_b_x2) <= 1e-12);
    CHECK(std::fabs(h.hessian.mumu - oracle::erlang_h_mumu_x2) <= 1e-12);
    CHECK(std::fabs(h.hessian.betabeta - oracle::erlang_h_bb_x2) <= 1e-12);
    CHECK(std::fabs(h.hessian.mubeta - oracle::erlang_h_mub_x2) <= 1e-12);
}

TEST_CASE("analytic Hessian agrees with central finite differences") {
    const std::vector<double> data{1.8, 4.2, 9.7, 22.0, 55.3};
    struct Point {
        double mu, beta;
    };
    for (const Point p : {Point{3.0, 0.4}, Point{8.0, 0.25}, Point{1.2, 2.0}}) {
        CAPTURE(p.mu, p.beta);
        const ErlangHessianResult analytic = erlang_hessian(data, p.mu, p.beta, kTight);
        const Matrix2 fd = erlang_fd_hessian(data, p.mu, p.beta,
                                             ErlangRepresentation::Full, kTight);
        CHECK(std::fabs(analytic.hessian.mumu - fd.mumu) <= 1e-4 * std::fabs(fd.mumu));
        CHECK(std::fabs(analytic.hessian.betabeta - fd.betabeta)
              <= 1e-4 * std::fabs(fd.betabeta));
        CHECK(std::fabs(analytic.hessian.mubeta - fd.mubeta)
              <= 1e-4 * std::fabs(fd.mubeta));
    }
}

TEST_CASE("the true mixed partial is the matrix entry, not the shortcut display") {
    // Away from the optimum the f11 = f10 + f01 shortcut is not the mixed
    // partial; finite differences side with the matrix entry.
    const std::vector<double> data{1.8, 4.2, 9.7, 22.0, 55.3};
    const double mu = 3.0, beta = 0.4;
    const ErlangHessianResult analytic = erlang_hessian(data, mu, beta, kTight);
    const Matrix2 fd = erlang_fd_hessian(data, mu, beta, ErlangRepresentation::Full, kTight);
    const double err_matrix = std::fabs(fd.mubeta - analytic.hessian.mubeta);
    const double err_shortcut = std::fabs(fd.mubeta - analytic.mixed_displayed);
    CHECK(analytic.mixed_discrepancy > 1e-3);
    CHECK(err_matrix < err_shortcut);
    CHECK(std::fabs(analytic.mixed_discrepancy
                    - std::fabs(analytic.hessian.mubeta - analytic.mixed_displayed))
          <= 1e-15);
}

TEST_CASE("fixed truncation spends exactly K terms per observation") {
    const std::vector<double> data{2.0, 5.0};
    const ErlangLoglik fixed = erlang_marginal_loglik(data, 3.0, 1.5,
                                                      ErlangRepresentation::Full,
                                                      ErlangTruncation::fixed(50));
    CHECK(fixed.n_evaluations == 100);  // 50 per observation
    CHECK(fixed.converged);

    CHECK(std::string(truncation_name(ErlangTruncation::fixed(10))) == "fixed");
    CHECK(std::string(truncation_name(ErlangTruncation::adaptive(1e-10))) == "adaptive");
    CHECK(std::string(representation_name(ErlangRepresentation::Full)) == "full");
    CHECK(std::string(representation_name(ErlangRepresentation::Bessel)) == "bessel");
}

TEST_CASE("a fixed cap below the series mode loses the density mass") {
    // mu = 1500, beta = 0.1, x = 15000: the reduced series peaks near
    // n* = sqrt(z) = 1500, so 1000 fixed terms stop short of the mode.
    const std::vector<double> data{15000.0};
    const double adaptive = loglik(15000.0, 1500.0, 0.1);
    const ErlangLoglik fixed = erlang_marginal_loglik(data, 1500.0, 0.1,
                                                      ErlangRepresentation::Full,
                                                      ErlangTruncation::fixed(1000));
    CHECK(std::fabs(adaptive - oracle::log_erlang_x15000_mu1500_b0p1) <= 1e-10);
    CHECK(fixed.value < adaptive - 100.0);

    // At mu = 15 the mode sits near n = 13, so the same cap is harmless.
    const std::vector<double> small{120.0};
    const ErlangLoglik fixed_small = erlang_marginal_loglik(small, 15.0, 0.1,
                                                            ErlangRepresentation::Full,
                                                            ErlangTruncation::fixed(1000));
    CHECK(std::fabs(fixed_small.value - oracle::log_erlang_x120_mu15_b0p1) <= 1e-12);
}

TEST_CASE("erlang argument validation") {
    const std::vector<double> ok{2.0};
    const std::vector<double> empty;
    const std::vector<double> bad{2.0, -1.0};
    CHECK_THROWS_WITH(erlang_marginal_loglik(empty, 3.0, 1.5, ErlangRepresentation::Full),
                      ContainsSubstring("no observations"));
    CHECK_THROWS_WITH(erlang_marginal_loglik(ok, 0.0, 1.5, ErlangRepresentation::Full),
                      ContainsSubstring("mu and beta must be > 0"));
    CHECK_THROWS_AS(erlang_marginal_loglik(ok, 3.0, -1.0, ErlangRepresentation::Full),
                    config_error);
    CHECK_THROWS_WITH(erlang_marginal_loglik(bad, 3.0, 1.5, ErlangRepresentation::Full),
                      ContainsSubstring("observations must be positive finite reals"));
    CHECK_THROWS_AS(erlang_marginal_loglik(ok, 1e16, 1.5, ErlangRepresentation::Full),
                    config_error);
    CHECK_THROWS_AS(erlang_marginal_loglik(ok, 3.0, 1.5, ErlangRepresentation::Full,
                                           ErlangTruncation::fixed(0)),
                    config_error);
    CHECK_THROWS_AS(erlang_marginal_loglik(ok, 3.0, 1.5, ErlangRepresentation::Full,
                                           ErlangTruncation::adaptive(0.0)),
                    config_error);
    CHECK_THROWS_AS(erlang_hessian(empty, 3.0, 1.5), config_error);
    CHECK_THROWS_AS(erlang_fd_hessian(empty, 3.0, 1.5, ErlangRepresentation::Full),
                    config_error);
    CHECK_THROWS_WITH(erlang_mmle(empty), ContainsSubstring("no observations"));
    CHECK_THROWS_WITH(erlang_mmle(ok, ErlangRepresentation::Full, {},
                                  std::make_pair(-1.0, 1.0)),
                      ContainsSubstring("init must be positive"));
}

TEST_CASE("maximum marginal likelihood recovers simulated parameters") {
    std::mt19937 rng(991);
    const double true_mu = 8.0, true_beta = 0.5;
    const std::vector<double> xs = erlang_simulate_data(true_mu, true_beta, 200, rng);
    const ErlangMmleResult fit = erlang_mmle(xs);
    REQUIRE(fit.converged);
    CAPTURE(fit.mu_hat, fit.beta_hat);
    CHECK(std::fabs(fit.mu_hat - true_mu) <= 3.0);
    CHECK(std::fabs(fit.beta_hat - true_beta) <= 0.25);
    REQUIRE(fit.ci_mu.is_finite());
    REQUIRE(fit.ci_beta.is_finite());
    CHECK(fit.ci_mu.lo < fit.mu_hat);
    CHECK(fit.ci_mu.hi > fit.mu_hat);
    CHECK(fit.ci_beta.lo < fit.beta_hat);
    CHECK(fit.ci_beta.hi > fit.beta_hat);
    CHECK(fit.loglik == Catch::Approx(
        erlang_marginal_loglik(xs, fit.mu_hat, fit.beta_hat,
                               ErlangRepresentation::Full, {}).value));
    // The analytic and numerical delta intervals should nearly coincide.
    REQUIRE(fit.ci_mu_fd.is_finite());
    CHECK(std::fabs(fit.ci_mu.lo - fit.ci_mu_fd.lo) <= 0.05 * (fit.ci_mu.hi - fit.ci_mu.lo));
    CHECK(std::fabs(fit.ci_mu.hi - fit.ci_mu_fd.hi) <= 0.05 * (fit.ci_mu.hi - fit.ci_mu.lo));

    // Explicit initialization lands on the same optimum.
    const ErlangMmleResult warm = erlang_mmle(xs, ErlangRepresentation::Full, {},
                                              std::make_pair(true_mu, true_beta));
    REQUIRE(warm.converged);
    CHECK(std::fabs(warm.mu_hat - fit.mu_hat) <= 1e-2 * fit.mu_hat);
    CHECK(std::fabs(warm.beta_hat - fit.beta_hat) <= 1e-2 * fit.beta_hat);
}

TEST_CASE("simulation driver is deterministic and well-formed") {
    const ErlangSimulationResult a = erlang_simulate(5.0, 1.0, 30, 8, 42,
                                                     ErlangRepresentation::Full, {});
    const ErlangSimulationResult b = erlang_simulate(5.0, 1.0, 30, 8, 42,
                                                     ErlangRepresentation::Full, {});
    REQUIRE(a.replicates.size() == 8);
    CHECK(a.n_converged >= 6);
    CHECK(a.rmse_mu == b.rmse_mu);  // same seed, same replicate results
    CHECK(a.rmse_beta == b.rmse_beta);
    CHECK(a.coverage_mu_analytic == b.coverage_mu_analytic);
    const bool cov_in_range = a.coverage_mu_analytic >= 0.0 && a.coverage_mu_analytic <= 1.0;
    CHECK(cov_in_range);
    CHECK(std::isfinite(a.rmse_mu));
    for (std::size_t i = 0; i < a.replicates.size(); ++i) {
        CHECK(a.replicates[i].rep == i);
        CHECK(a.replicates[i].mu_hat == b.replicates[i].mu_hat);
    }
    CHECK_THROWS_AS(erlang_simulate(5.0, 1.0, 30, 0, 42, ErlangRepresentation::Full, {}),
                    config_error);
}
