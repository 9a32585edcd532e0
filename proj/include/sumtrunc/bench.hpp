#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "catalog.hpp"
#include "parallel.hpp"
#include "truncation.hpp"

// Benchmark suites: fixed experiment grids evaluated cell by cell, one row
// per (series, params, method, epsilon).  Errors are measured robustly in
// log space against the closed form when one exists, otherwise against the
// 500000-term reference S_M.  Success flags follow the three-way scheme:
// hit_eps  : |S - S_hat| < eps (strict),
// beat_ref : |S - S_hat| <= |S - S_M|,
// either   : hit_eps or beat_ref.
namespace sumtrunc {

struct BenchRow {
    std::string suite;
    std::string series;
    std::string params;  // "name=value" pairs joined by ';'
    std::string method;  // threshold | error_bounding_pairs | batches | cap_1e3 | cap_5e5
    std::uint64_t batch_n = 0;  // batches rows only
    double epsilon = 0.0;
    double ratio_limit = std::numeric_limits<double>::quiet_NaN();
    bool l_gt_half = false;
    std::uint64_t n_evaluations = 0;
    bool converged = false;
    double log_sum = log_zero_value;
    double abs_error = std::numeric_limits<double>::quiet_NaN();
    double ref_error = std::numeric_limits<double>::quiet_NaN();
    bool hit_eps = false;
    bool beat_ref = false;
    bool either_ok = false;
};

namespace detail {

constexpr std::uint64_t bench_reference_terms = 500000;
constexpr std::uint64_t bench_small_cap_terms = 1000;

inline std::string format_params(const Params& params) {
    std::string out;
    for (const auto& [name, value] : params) {
        if (!out.empty()) out.push_back(';');
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s=%.17g", name.c_str(), value);
        out += buf;
    }
    return out;
}

// Shared state for one parameter cell: the series, the truth (closed form if
// known, else S_M), the reference S_M, and the two fixed-cap results.
struct BenchCell {
    SeriesSpec series;
    std::string params_label;
    LogValue s_true;
    LogValue s_ref;       // S_M, 500000-term reference
    LogValue cap_small;   // 1000-term fixed cap
    double ratio_limit = std::numeric_limits<double>::quiet_NaN();
};

inline BenchCell make_bench_cell(const std::string& series_id, const Params& params) {
    BenchCell cell;
    cell.series = make_series(series_id, params);
    cell.params_label = format_params(params);
    cell.s_ref = capped_reference(cell.series, bench_reference_terms - 1);
    cell.cap_small = capped_reference(cell.series, bench_small_cap_terms - 1);
    const std::optional<LogValue> closed = closed_form(series_id, params);
    cell.s_true = closed ? *closed : cell.s_ref;
    if (cell.series.ratio_limit) cell.ratio_limit = *cell.series.ratio_limit;
    return cell;
}

inline void score_row(BenchRow& row, const BenchCell& cell) {
    row.abs_error = robust_error(LogValue::from_log(row.log_sum), cell.s_true);
    row.ref_error = robust_error(cell.s_ref, cell.s_true);
    row.hit_eps = row.abs_error < row.epsilon;
    row.beat_ref = row.abs_error <= row.ref_error;
    row.either_ok = row.hit_eps || row.beat_ref;
}

inline BenchRow bench_adaptive_row(const std::string& suite, const std::string& series_id,
                                   const BenchCell& cell, double eps, Method method,
                                   std::uint64_t batch_n, std::uint64_t max_terms) {
    TruncationConfig config;
    config.method = method;
    config.epsilon = eps;
    config.max_terms = max_terms;
    if (method == Method::Batches) config.batch_size = batch_n;
    const TruncationResult result = truncate(cell.series, config);

    BenchRow row;
    row.suite = suite;
    row.series = series_id;
    row.params = cell.params_label;
    row.method = method_name(method);
    row.batch_n = method == Method::Batches ? batch_n : 0;
    row.epsilon = eps;
    row.ratio_limit = cell.ratio_limit;
    row.l_gt_half = cell.ratio_limit > 0.5;
    row.n_evaluations = result.n_evaluations;
    row.converged = result.converged;
    row.log_sum = result.log_sum.log();
    score_row(row, cell);
    return row;
}

inline BenchRow bench_cap_row(const std::string& suite, const std::string& series_id,
                              const BenchCell& cell, double eps, std::uint64_t cap_terms) {
    BenchRow row;
    row.suite = suite;
    row.series = series_id;
    row.params = cell.params_label;
    row.method = cap_terms == bench_small_cap_terms ? "cap_1e3" : "cap_5e5";
    row.epsilon = eps;
    row.ratio_limit = cell.ratio_limit;
    row.l_gt_half = cell.ratio_limit > 0.5;
    row.n_evaluations = cap_terms;
    row.converged = true;
    row.log_sum =
        (cap_terms == bench_small_cap_terms ? cell.cap_small : cell.s_ref).log();
    score_row(row, cell);
    return row;
}

inline double machine_epsilon() { return std::numeric_limits<double>::epsilon(); }

}  // namespace detail

// COMP normalising-constant grid, Sum-to-threshold and Error-bounding pairs.
inline std::vector<BenchRow> bench_table1() {
    const std::vector<Params> cells{{{"mu", 10.0}, {"nu", 0.1}},
                                    {{"mu", 100.0}, {"nu", 0.01}},
                                    {{"mu", 1000.0}, {"nu", 0.001}},
                                    {{"mu", 10000.0}, {"nu", 0.0001}}};
    const double d = detail::machine_epsilon();
    const std::vector<double> eps_list{1e6 * d, d};
    const std::vector<Method> methods{Method::SumToThreshold, Method::ErrorBoundingPairs};
    std::vector<BenchRow> rows(cells.size() * eps_list.size() * methods.size());
    parallel_for(cells.size(), [&](std::size_t c) {
        const detail::BenchCell cell = detail::make_bench_cell("comp_reparam", cells[c]);
        std::size_t i = c * eps_list.size() * methods.size();
        for (const double eps : eps_list) {
            for (const Method method : methods) {
                rows[i++] = detail::bench_adaptive_row("table1", "comp_reparam", cell, eps,
                                                       method, 0, 300000);
            }
        }
    });
    return rows;
}

// Same COMP grid under Batches with N = 20; the two slow-decay cells hit the
// 300000-term cap because the end-of-batch ratio test never clears.
inline std::vector<BenchRow> bench_comp_batches() {
    const std::vector<Params> cells{{{"mu", 10.0}, {"nu", 0.1}},
                                    {{"mu", 100.0}, {"nu", 0.01}},
                                    {{"mu", 1000.0}, {"nu", 0.001}},
                                    {{"mu", 10000.0}, {"nu", 0.0001}}};
    const double d = detail::machine_epsilon();
    const std::vector<double> eps_list{1e6 * d, d};
    std::vector<BenchRow> rows(cells.size() * eps_list.size());
    parallel_for(cells.size(), [&](std::size_t c) {
        const detail::BenchCell cell = detail::make_bench_cell("comp_reparam", cells[c]);
        std::size_t i = c * eps_list.size();
        for (const double eps : eps_list) {
            rows[i++] = detail::bench_adaptive_row("comp_batches", "comp_reparam", cell, eps,
                                                   Method::Batches, 20, 300000);
        }
    });
    return rows;
}

// Power-geometric sums with closed form Li2(1/a): the well-conditioned a=2
// case and the slow a=1.1 case, including the too-small batch size N=5 that
// never satisfies the end-of-batch ratio test.
inline std::vector<BenchRow> bench_power_geometric() {
    struct Cell {
        double a;
        Method method;
        std::uint64_t batch_n;
    };
    const std::vector<Cell> grid{{2.0, Method::SumToThreshold, 0},
                                 {2.0, Method::ErrorBoundingPairs, 0},
                                 {2.0, Method::Batches, 2},
                                 {1.1, Method::SumToThreshold, 0},
                                 {1.1, Method::ErrorBoundingPairs, 0},
                                 {1.1, Method::Batches, 5},
                                 {1.1, Method::Batches, 10}};
    const double eps = detail::machine_epsilon();
    std::vector<BenchRow> rows(grid.size());
    const detail::BenchCell cell_2 = detail::make_bench_cell("power_geometric", {{"a", 2.0}});
    const detail::BenchCell cell_11 = detail::make_bench_cell("power_geometric", {{"a", 1.1}});
    parallel_for(grid.size(), [&](std::size_t i) {
        const Cell& g = grid[i];
        const detail::BenchCell& cell = g.a == 2.0 ? cell_2 : cell_11;
        rows[i] = detail::bench_adaptive_row("power_geometric", "power_geometric", cell, eps,
                                             g.method, g.batch_n, 100000);
    });
    return rows;
}

namespace detail {

// Shared five-method block used by the success-rate grids: Batches with the
// guarantee-sized N, Error-bounding pairs, Sum-to-threshold, and both caps.
inline void bench_rate_cell(const std::string& suite, const std::string& series_id,
                            const Params& params, const std::vector<double>& eps_list,
                            std::vector<BenchRow>& rows, std::size_t base) {
    const BenchCell cell = make_bench_cell(series_id, params);
    const std::uint64_t batch_n = min_batch_size(cell.ratio_limit);
    std::size_t i = base;
    for (const double eps : eps_list) {
        rows[i++] = bench_adaptive_row(suite, series_id, cell, eps, Method::Batches, batch_n,
                                       100000);
        rows[i++] = bench_adaptive_row(suite, series_id, cell, eps,
                                       Method::ErrorBoundingPairs, 0, 100000);
        rows[i++] = bench_adaptive_row(suite, series_id, cell, eps, Method::SumToThreshold, 0,
                                       100000);
        rows[i++] = bench_cap_row(suite, series_id, cell, eps, bench_small_cap_terms);
        rows[i++] = bench_cap_row(suite, series_id, cell, eps, bench_reference_terms);
    }
}

}  // namespace detail

// Poisson factorial moments E[(X)_r] = lambda^r: success rates across a
// (lambda, r, eps) grid for all five methods.
inline std::vector<BenchRow> bench_poisson_fact() {
    const std::vector<double> lambdas{0.5, 1.0, 10.0, 100.0};
    const std::vector<double> rs{2.0, 5.0, 10.0};
    const double d = detail::machine_epsilon();
    const std::vector<double> eps_list{d, 10.0 * d, 1e4 * d};
    std::vector<Params> cells;
    for (const double lambda : lambdas) {
        for (const double r : rs) cells.push_back({{"lambda", lambda}, {"r", r}});
    }
    const std::size_t rows_per_cell = eps_list.size() * 5;
    std::vector<BenchRow> rows(cells.size() * rows_per_cell);
    parallel_for(cells.size(), [&](std::size_t c) {
        detail::bench_rate_cell("poisson_fact", "poisson_fact_moment", cells[c], eps_list,
                                rows, c * rows_per_cell);
    });
    return rows;
}

// Negative-binomial marginalisation with thinning: the ratio limit
// L = (mu/(mu+phi))(1-eta) sweeps (0,1), stratifying the grid into cells
// where Sum-to-threshold keeps its guarantee (L <= 1/2) and cells where it
// does not.
inline std::vector<BenchRow> bench_negbin() {
    const std::vector<double> mus{1.0, 10.0, 100.0};
    const std::vector<double> phis{0.1, 0.5, 1.0, 10.0};
    const std::vector<double> etas{0.01, 0.1, 0.5, 0.75};
    const std::vector<double> xs{0.0, 5.0, 10.0};
    const double d = detail::machine_epsilon();
    const std::vector<double> eps_list{d, 10.0 * d, 1e4 * d};
    std::vector<Params> cells;
    for (const double mu : mus) {
        for (const double phi : phis) {
            for (const double eta : etas) {
                for (const double x : xs) {
                    cells.push_back({{"mu", mu}, {"phi", phi}, {"eta", eta}, {"x", x}});
                }
            }
        }
    }
    const std::size_t rows_per_cell = eps_list.size() * 5;
    std::vector<BenchRow> rows(cells.size() * rows_per_cell);
    parallel_for(cells.size(), [&](std::size_t c) {
        detail::bench_rate_cell("negbin", "negbin_marginal", cells[c], eps_list, rows,
                                c * rows_per_cell);
    });
    return rows;
}

inline std::vector<BenchRow> run_bench_suite(const std::string& suite) {
    if (suite == "table1") return bench_table1();
    if (suite == "comp_batches") return bench_comp_batches();
    if (suite == "poisson_fact") return bench_poisson_fact();
    if (suite == "negbin") return bench_negbin();
    if (suite == "power_geometric") return bench_power_geometric();
    throw config_error("unknown bench suite '" + suite
                       + "' (known: table1, comp_batches, poisson_fact, negbin, "
                         "power_geometric)");
}

// Fraction of rows of one method (optionally restricted to one L stratum)
// whose `either` flag is set.  Used by the success-rate summaries.
inline double bench_either_rate(const std::vector<BenchRow>& rows, const std::string& method,
                                std::optional<bool> l_gt_half = std::nullopt) {
    std::size_t total = 0, ok = 0;
    for (const BenchRow& row : rows) {
        if (row.method != method) continue;
        if (l_gt_half && row.l_gt_half != *l_gt_half) continue;
        ++total;
        if (row.either_ok) ++ok;
    }
    return total == 0 ? std::numeric_limits<double>::quiet_NaN()
                      : static_cast<double>(ok) / static_cast<double>(total);
}

}  // namespace sumtrunc
