#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

// Frozen high-precision reference values for the test suite.  Every constant
// below was computed with 60-digit arithmetic (mpmath) and rounded to the
// nearest double; tests compare library output against these literals rather
// than recomputing them with the code under test.
namespace oracle {

// --- dilogarithm Li2(x) ---------------------------------------------------
inline constexpr double li2_half = 0.5822405264650125;      // Li2(1/2)
inline constexpr double li2_inv_1p1 = 1.323327017203718;    // Li2(1/1.1)
inline constexpr double li2_inv_1p01 = 1.589086484830372;   // Li2(1/1.01)
inline constexpr double li2_quarter = 0.2676526390827326;   // Li2(0.25)
inline constexpr double li2_tenth = 0.10261779109939113;    // Li2(0.1)
inline constexpr double li2_0p6 = 0.7275863077163334;       // Li2(0.6)
inline constexpr double li2_0p75 = 0.9784693929303061;      // Li2(0.75)
inline constexpr double li2_0p9 = 1.2997147230049588;       // Li2(0.9)
inline constexpr double li2_0p99 = 1.5886254480763753;      // Li2(0.99)
inline constexpr double pi_sq_over_6 = 1.6449340668482264;  // Li2(1)
inline constexpr double log_li2_half = -0.5408716409125054;
inline constexpr double log_li2_inv_1p1 = 0.2801490331256831;

// --- COMP normalizers -----------------------------------------------------
// Z(mu, nu) = sum mu^n/(n!)^nu;  Z~(mu, nu) = sum (mu^n/n!)^nu.
inline constexpr double log_z_comp_10_0p5 = 51.95670398007316;   // log Z(10, 0.5)
inline constexpr double log_z_comp_5_1p5 = 3.469570172227263;    // log Z(5, 1.5)
inline constexpr double log_z_comp_10_2 = 4.505084118123957;     // log Z(10, 2) = log I0(2 sqrt 10)
inline constexpr double log_zt_comp_10_0p1 = 3.9527348615899767; // log Z~(10, 0.1)
inline constexpr double log_zt_comp_100_0p01 = 6.4292352872477165; // log Z~(100, 0.01)
inline constexpr double log_zt_comp_10_2 = 17.589610428244274;   // log Z~(10, 2) = log I0(20)

// --- double Poisson normalizing sum ----------------------------------------
inline constexpr double log_dp_5_0p5 = 2.8725935873489146;  // mu=5,   phi=0.5
inline constexpr double log_dp_2_1 = 2.0;                   // mu=2,   phi=1 (exact: e^2)
inline constexpr double log_dp_0p5_2 = 0.5534653828140966;  // mu=0.5, phi=2

// --- modified Bessel I_v(z) -------------------------------------------------
inline constexpr double log_i0_2sqrt10 = 4.505084118123957;
inline constexpr double log_i0_20 = 17.589610428244274;
inline constexpr double log_i1_2sqrt180 = 24.254819624155957;  // I1(2 sqrt 180)
inline constexpr double log_i2p5_10 = 7.615058171703351;       // I_{2.5}(10)
inline constexpr double log_i0_600 = 595.8828051464338;        // beyond std guard
inline constexpr double log_i1_3000 = 2995.077752662131;
inline constexpr double log_i0_0p1 = 0.0024984392338762433;

// --- Erlang mixture interarrival log-density --------------------------------
inline constexpr double log_erlang_x2_mu3_b1p5 = -1.4270019782971903;
inline constexpr double log_erlang_x120_mu15_b0p1 = -4.936193387278616;
inline constexpr double log_erlang_x15000_mu1500_b0p1 = -7.2248324308632546;
inline constexpr double log_erlang_x0p5_mu1_b2 = -0.38404320050681306;

// --- Erlang reduced-series primitives at z = mu*beta*x = 0.9 ----------------
// G = sum_{n>=1} z^n/(n!(n-1)!), C = sum n z^n/(n!(n-1)!),
// D2 = sum n^2 z^n/(n!(n-1)!); RC = C/G, RD2 = D2/G.
inline constexpr double gred_0p9 = 1.3705175661383568;  // = sqrt(z) I1(2 sqrt z)
inline constexpr double cred_0p9 = 1.911538001703067;
inline constexpr double d2red_0p9 = 3.145003811227588;
inline constexpr double rc_0p9 = 1.394756294214541;
inline constexpr double rd2_0p9 = 2.294756294214541;    // = rc + z/... (D2 = C + z G)

// --- Erlang gradient/Hessian at a single observation x=2, mu=3, beta=1.5 ----
// Derivatives of log f(x | mu, beta) for the zero-truncated-Poisson Erlang
// mixture (normalizer included, J = 1 observation).
inline constexpr double erlang_grad_mu_x2 = 0.04366371259126919;
inline constexpr double erlang_grad_b_x2 = 0.19211881816505028;
inline constexpr double erlang_h_mumu_x2 = -0.14620522273627443;
inline constexpr double erlang_h_bb_x2 = -0.8053849129533368;
inline constexpr double erlang_h_mub_x2 = 0.328013816245015;

// --- negative binomial pmf and thinned marginal -----------------------------
inline constexpr double log_nb_5_mu10_phi0p5 = -3.1682547577969014;  // NB(5; 10, 0.5)
inline constexpr double log_nb_3_mu1_phi10 = -2.7531600700859986;    // NB(3; 1, 10)
// Thinned marginal: x=5, mu=10, phi=0.5, eta=0.3 -> NB(5; 3, 0.5).
inline constexpr double log_nb_marginal_series = -3.145751191751978;
inline constexpr double log_nb_5_mu3_phi0p5 = -3.145751191751978;

// --- log-gamma ratio lgamma(z + c) - lgamma(z) -------------------------------
// Chosen to cover fractional and integer shifts, the recurrence region
// (z < 20), the Stirling region, and z large enough that differencing two
// lgamma doubles would lose ~1e-12.
inline constexpr double lgr_1_m0p9 = 2.2527126517342061913;
inline constexpr double lgr_1_0p5 = -0.12078223763524522235;
inline constexpr double lgr_7_m0p5 = -0.91668915215295946654;
inline constexpr double lgr_7_9 = 21.320020171830790571;
inline constexpr double lgr_20_0p1 = 0.29730831643744438296;
inline constexpr double lgr_101_m0p9 = -4.145103766706678632;
inline constexpr double lgr_101_19p5 = 91.678224890671020291;
inline constexpr double lgr_2401_m0p9 = -7.0049203657440512773;
inline constexpr double lgr_2401_m0p5 = -3.891664091500975067;
inline constexpr double lgr_2401_9 = 70.067741456153889895;
inline constexpr double lgr_50001_m0p9 = -9.7378013559716550345;
inline constexpr double lgr_3_m2p5 = -0.12078223763524522235;
// NB pmf at large count: log NB(2400; 10, 0.1).
inline constexpr double log_nb_2400_mu10_phi0p1 = -33.599939116765783083;
// log NB(100; 10, 0.1) and two moderate cells.
inline constexpr double log_nb_100_mu10_phi0p1 = -7.8543615554418187113;
inline constexpr double log_nb_9_mu100_phi10 = -14.044954098352514827;
inline constexpr double log_nb_30_mu100_phi0p5 = -5.0784088069461662326;

// --- Poisson factorial moments ----------------------------------------------
inline constexpr double log_pfm_lam10_r2 = 4.605170185988092;   // = 2 ln 10
inline constexpr double log_pfm_lam0p5_r5 = -3.4657359027997265; // = 5 ln 1/2

// --- normal distribution -----------------------------------------------------
inline constexpr double probit_0p975 = 1.9599639845400543;
inline constexpr double probit_0p995 = 2.575829303548901;
inline constexpr double probit_0p9995 = 3.290526731491895;
inline constexpr double probit_0p3 = -0.5244005127080408;
inline constexpr double probit_0p025 = -1.9599639845400543;
inline constexpr double probit_0p005 = -2.575829303548901;
inline constexpr double probit_1em10 = -6.361340902404057;
inline constexpr double normal_cdf_1p96 = 0.9750021048517795;
inline constexpr double normal_cdf_m3 = 0.0013498980316300946;
inline constexpr double normal_cdf_0p5 = 0.6914624612740131;

// --- log(1 - e^x) for x < 0 ---------------------------------------------------
inline constexpr double log1mexp_m1em10 = -23.025850929990458;  // x = -1e-10
inline constexpr double log1mexp_m0p1 = -2.3521684610440907;    // x = -0.1
inline constexpr double log1mexp_mln2 = -0.6931471805599453;    // x = -ln 2 (branch point)
inline constexpr double log1mexp_m5 = -0.006760749449488557;    // x = -5
inline constexpr double log1mexp_m50 = -1.9287498479639178e-22; // x = -50

// --- extended-precision plain sums (test-side references) --------------------

// Sum of a double vector accumulated in __float128 (113-bit mantissa): the
// per-step rounding is ~2^-113 relative, negligible against the double-
// precision bounds under test, so this serves as the "exact" sum.
inline double extended_sum(std::span<const double> values) {
    __float128 acc = 0;
    for (const double v : values) acc += static_cast<__float128>(v);
    return static_cast<double>(acc);
}

// Relative error of `computed` against the extended-precision sum of `values`.
inline double relative_error_vs_extended(double computed, std::span<const double> values) {
    __float128 acc = 0;
    for (const double v : values) acc += static_cast<__float128>(v);
    const __float128 diff = static_cast<__float128>(computed) - acc;
    if (acc == 0) return computed == 0.0 ? 0.0 : INFINITY;
    double rel = static_cast<double>(diff / acc);
    return std::fabs(rel);
}

}  // namespace oracle
