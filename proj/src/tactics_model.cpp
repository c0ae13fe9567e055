#include <algorithm>
#include <cmath>
#include <set>

#include "aperture/stats.hpp"
#include "aperture/tactics.hpp"
#include "tactics_detail.hpp"

namespace aperture::tactics {

using detail::Notes;
using detail::expect_sample;
using detail::join;
using detail::join_numbers;
using detail::numeric_column;
using detail::stamp;

namespace {

// Rows with every listed column present, plus the count that was dropped.
struct CompleteRows {
    std::vector<std::size_t> rows;
    std::size_t dropped = 0;
};

CompleteRows complete_rows(const Table& t, const std::vector<std::size_t>& cols) {
    CompleteRows out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        bool miss = false;
        for (std::size_t c : cols) miss = miss || is_missing(t.rows[r][c]);
        if (miss)
            ++out.dropped;
        else
            out.rows.push_back(r);
    }
    return out;
}

// Default per-axis resolution for evaluation grids attached to fitted
// models; keeps the total cell count around a few hundred.
int default_axis_grid(std::size_t axes) {
    switch (axes) {
    case 1: return 64;
    case 2: return 16;
    case 3: return 6;
    case 4: return 4;
    default: return 2;
    }
}

// Solve A x = b by Gaussian elimination with partial pivoting. `names`
// labels the unknowns for the rank-deficiency error message.
std::vector<double> solve_linear(std::vector<std::vector<double>> A, std::vector<double> b,
                                 const std::vector<std::string>& names) {
    std::size_t n = A.size();
    double scale = 0.0;
    for (const auto& row : A)
        for (double v : row) scale = std::max(scale, std::fabs(v));
    double tol = std::max(scale, 1.0) * 1e-12;

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t best = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(A[r][col]) > std::fabs(A[best][col])) best = r;
        std::swap(A[col], A[best]);
        std::swap(b[col], b[best]);
        std::swap(perm[col], perm[best]);
        if (std::fabs(A[col][col]) <= tol)
            throw OpError("rank-deficient design: '" + names[col] +
                          "' is collinear with earlier terms");
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = A[r][col] / A[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= A[i][c] * x[c];
        x[i] = s / A[i][i];
    }
    return x;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

// Leading eigenvector of a symmetric PSD matrix by power iteration.
// Deterministic start: the basis vector of the largest diagonal entry.
// A zero matrix yields eigenvalue 0 with a vector orthogonal to `prior`.
std::pair<double, std::vector<double>> power_iterate(
    const std::vector<std::vector<double>>& C,
    const std::vector<std::vector<double>>& prior) {
    std::size_t d = C.size();
    std::size_t start = 0;
    for (std::size_t i = 1; i < d; ++i)
        if (C[i][i] > C[start][start]) start = i;

    std::vector<double> v(d, 0.0);
    v[start] = 1.0;
    if (C[start][start] <= 0.0) {
        // Nothing left to explain: complete the basis deterministically.
        for (std::size_t axis = 0; axis < d; ++axis) {
            std::vector<double> cand(d, 0.0);
            cand[axis] = 1.0;
            for (const auto& p : prior) {
                double proj = dot(cand, p);
                for (std::size_t i = 0; i < d; ++i) cand[i] -= proj * p[i];
            }
            double nn = norm(cand);
            if (nn > 1e-9) {
                for (auto& x : cand) x /= nn;
                return {0.0, cand};
            }
        }
        return {0.0, v};
    }

    for (int iter = 0; iter < 100000; ++iter) {
        std::vector<double> w(d, 0.0);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) w[i] += C[i][j] * v[j];
        double nw = norm(w);
        if (nw == 0.0) break; // exact eigenvector of eigenvalue 0
        double diff = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            w[i] /= nw;
            diff = std::max(diff, std::fabs(w[i] - v[i]));
        }
        v = std::move(w);
        if (diff < 1e-12) break;
    }
    std::vector<double> Cv(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) Cv[i] += C[i][j] * v[j];
    double lambda = std::max(0.0, dot(v, Cv));
    return {lambda, v};
}

} // namespace

// -------------------------------------------------------------- smooth_kde

Representation smooth_kde(const Representation& in, const KdeSpec& spec,
                          const std::string& node_id) {
    const Table& t = expect_sample(in, "smooth_kde");
    std::size_t d = spec.columns.size();
    if (d < 1 || d > 2) throw ValidationError("smooth_kde takes one or two columns");
    if (spec.grid_n.size() != d) throw ValidationError("smooth_kde needs grid_n per axis");
    for (int g : spec.grid_n)
        if (g < 2) throw ValidationError("smooth_kde grid_n must be at least 2");
    if (!spec.bandwidth.empty() && spec.bandwidth.size() != d)
        throw ValidationError("smooth_kde bandwidth list must match the axis count");
    if (!spec.range.empty() && spec.range.size() != d)
        throw ValidationError("smooth_kde range list must match the axis count");

    std::vector<std::size_t> cols;
    for (const auto& name : spec.columns) {
        numeric_column(t, name, "smooth_kde");
        cols.push_back(t.column_index(name));
    }
    auto cr = complete_rows(t, cols);
    std::size_t n = cr.rows.size();
    if (n == 0) throw OpError("smooth_kde has no rows to smooth");
    if (spec.bandwidth.empty() && n < 2)
        throw OpError("smooth_kde needs at least two rows for auto bandwidth");

    std::vector<std::vector<double>> axis_vals(d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t r : cr.rows) axis_vals[a].push_back(as_number(t.rows[r][cols[a]]));

    std::vector<double> h(d);
    for (std::size_t a = 0; a < d; ++a) {
        if (!spec.bandwidth.empty()) {
            h[a] = spec.bandwidth[a];
            if (!(h[a] > 0.0))
                throw ValidationError("smooth_kde bandwidth must be positive on axis '" +
                                      spec.columns[a] + "'");
        } else {
            h[a] = silverman_bandwidth(axis_vals[a]);
            if (h[a] <= 0.0)
                throw OpError("smooth_kde: zero-variance axis '" + spec.columns[a] + "'");
        }
    }

    ModelRep m;
    m.evaluator = EvaluatorKind::DensityGrid;
    for (std::size_t a = 0; a < d; ++a) {
        AxisDomain ax;
        ax.name = spec.columns[a];
        ax.grid_n = spec.grid_n[a];
        if (!spec.range.empty() && spec.range[a]) {
            ax.lo = spec.range[a]->first;
            ax.hi = spec.range[a]->second;
            if (!(ax.lo < ax.hi))
                throw ValidationError("smooth_kde range must have lo < hi on axis '" +
                                      spec.columns[a] + "'");
        } else {
            auto [mn, mx] = std::minmax_element(axis_vals[a].begin(), axis_vals[a].end());
            ax.lo = *mn - 3.0 * h[a];
            ax.hi = *mx + 3.0 * h[a];
        }
        m.domain.push_back(ax);
        m.params.push_back(h[a]);
        m.param_names.push_back("bandwidth(" + spec.columns[a] + ")");
    }

    // Density at cell centers via the Gaussian product kernel.
    if (d == 1) {
        m.grid.resize(static_cast<std::size_t>(m.domain[0].grid_n));
        double inv = 1.0 / (static_cast<double>(n) * h[0]);
        for (int i = 0; i < m.domain[0].grid_n; ++i) {
            double x = m.axis_center(0, i);
            double acc = 0.0;
            for (double xi : axis_vals[0]) acc += gaussian_phi((x - xi) / h[0]);
            m.grid[static_cast<std::size_t>(i)] = inv * acc;
        }
    } else {
        auto n0 = static_cast<std::size_t>(m.domain[0].grid_n);
        auto n1 = static_cast<std::size_t>(m.domain[1].grid_n);
        m.grid.assign(n0 * n1, 0.0);
        double inv = 1.0 / (static_cast<double>(n) * h[0] * h[1]);
        for (std::size_t i = 0; i < n0; ++i) {
            double x = m.axis_center(0, static_cast<int>(i));
            for (std::size_t j = 0; j < n1; ++j) {
                double y = m.axis_center(1, static_cast<int>(j));
                double acc = 0.0;
                for (std::size_t r = 0; r < n; ++r)
                    acc += gaussian_phi((x - axis_vals[0][r]) / h[0]) *
                           gaussian_phi((y - axis_vals[1][r]) / h[1]);
                m.grid[i * n1 + j] = inv * acc;
            }
        }
    }

    Notes notes{{"columns", join(spec.columns)},
                {"bandwidth", join_numbers(h)},
                {"grid", join_numbers(std::vector<double>(spec.grid_n.begin(), spec.grid_n.end()))},
                {"n", std::to_string(n)},
                {"dropped_missing", std::to_string(cr.dropped)}};
    return stamp(in, std::move(m), "smooth_kde", node_id, std::move(notes));
}

// -------------------------------------------------------- magnitude_adjust

Representation magnitude_adjust(const Representation& in, const AdjustmentSpec& spec,
                                const std::string& node_id) {
    if (!(spec.u_max > 0.0)) throw ValidationError("magnitude_adjust needs u_max > 0");

    Notes notes{{"pivot", format_double(spec.pivot)},
                {"u_max", format_double(spec.u_max)},
                {"value_column", spec.value_column},
                {"uncertainty_column", spec.uncertainty_column},
                {"weight_fn", "clamp(1-u/u_max,0,1)"}};

    if (in.kind() == RepKind::Sample) {
        const Table& t = in.sample();
        numeric_column(t, spec.value_column, "magnitude_adjust");
        numeric_column(t, spec.uncertainty_column, "magnitude_adjust");
        std::size_t vi = t.column_index(spec.value_column);
        std::size_t ui = t.column_index(spec.uncertainty_column);

        Table out = t;
        out.rows.clear();
        std::size_t dropped = 0;
        for (const auto& row : t.rows) {
            if (is_missing(row[vi]) || is_missing(row[ui])) {
                ++dropped;
                continue;
            }
            auto r = row;
            double w = spec.weight(as_number(r[ui]));
            r[vi] = Cell{spec.pivot + (as_number(r[vi]) - spec.pivot) * w};
            out.rows.push_back(std::move(r));
        }
        notes.emplace_back("dropped_missing", std::to_string(dropped));
        return stamp(in, std::move(out), "magnitude_adjust", node_id, std::move(notes));
    }

    if (in.kind() == RepKind::Summary) {
        const SummaryRep& s = in.summary();
        auto stat_of = [&](const std::string& name) -> std::size_t {
            for (std::size_t i = 0; i < s.stat_names.size(); ++i)
                if (s.stat_names[i] == name) return i;
            throw ValidationError("magnitude_adjust: no stat named '" + name + "'");
        };
        std::size_t vi = stat_of(spec.value_column);
        std::size_t ui = stat_of(spec.uncertainty_column);
        SummaryRep out = s;
        for (auto& g : out.groups) {
            // A group missing either stat cannot be weighted; leave it be.
            if (!is_number(g.stats[vi]) || !is_number(g.stats[ui])) continue;
            double w = spec.weight(as_number(g.stats[ui]));
            g.stats[vi] = Cell{spec.pivot + (as_number(g.stats[vi]) - spec.pivot) * w};
        }
        return stamp(in, std::move(out), "magnitude_adjust", node_id, std::move(notes));
    }

    throw ValidationError("magnitude_adjust expects a sample or summary input");
}

// ------------------------------------------------------------- predict_ols

Representation predict_ols(const Representation& in, const std::string& y,
                           const std::vector<std::string>& xs, const std::string& node_id) {
    const Table& t = expect_sample(in, "predict_ols");
    if (xs.empty()) throw ValidationError("predict_ols needs at least one regressor");
    {
        std::set<std::string> uniq(xs.begin(), xs.end());
        if (uniq.size() != xs.size())
            throw ValidationError("predict_ols has duplicate regressors");
        if (uniq.count(y)) throw ValidationError("predict_ols response cannot be a regressor");
    }
    numeric_column(t, y, "predict_ols");
    std::vector<std::size_t> cols{t.column_index(y)};
    for (const auto& x : xs) {
        numeric_column(t, x, "predict_ols");
        cols.push_back(t.column_index(x));
    }
    std::string fitted_name = y + "_fitted";
    if (t.find_column(fitted_name))
        throw ValidationError("column '" + fitted_name + "' already exists");

    auto cr = complete_rows(t, cols);
    std::size_t n = cr.rows.size();
    std::size_t p = xs.size() + 1; // intercept + regressors
    if (n < p)
        throw OpError("predict_ols needs at least " + std::to_string(p) + " rows, got " +
                      std::to_string(n));

    // Normal equations on the design [1, x1, x2, ...].
    std::vector<std::vector<double>> xtx(p, std::vector<double>(p, 0.0));
    std::vector<double> xty(p, 0.0);
    auto design = [&](std::size_t r, std::size_t j) -> double {
        return j == 0 ? 1.0 : as_number(t.rows[r][cols[j]]);
    };
    for (std::size_t r : cr.rows) {
        double yv = as_number(t.rows[r][cols[0]]);
        for (std::size_t i = 0; i < p; ++i) {
            double di = design(r, i);
            xty[i] += di * yv;
            for (std::size_t j = i; j < p; ++j) xtx[i][j] += di * design(r, j);
        }
    }
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < i; ++j) xtx[i][j] = xtx[j][i];

    std::vector<std::string> term_names{"intercept"};
    for (const auto& x : xs) term_names.push_back(x);
    std::vector<double> beta = solve_linear(xtx, xty, term_names);

    Table fit;
    fit.source_id = t.source_id;
    fit.columns = t.columns;
    Column fc;
    fc.name = fitted_name;
    fc.kind = ColumnKind::Continuous;
    fit.columns.push_back(fc);
    double sse = 0.0, sst = 0.0, ysum = 0.0;
    for (std::size_t r : cr.rows) ysum += as_number(t.rows[r][cols[0]]);
    double ybar = ysum / static_cast<double>(n);
    for (std::size_t r : cr.rows) {
        double yh = beta[0];
        for (std::size_t j = 1; j < p; ++j) yh += beta[j] * design(r, j);
        auto row = t.rows[r];
        row.push_back(Cell{yh});
        fit.rows.push_back(std::move(row));
        double yv = as_number(t.rows[r][cols[0]]);
        sse += (yv - yh) * (yv - yh);
        sst += (yv - ybar) * (yv - ybar);
    }

    ModelRep m;
    m.evaluator = EvaluatorKind::OlsLine;
    m.params = beta;
    m.param_names.push_back("intercept");
    for (const auto& x : xs) m.param_names.push_back("coef(" + x + ")");
    for (std::size_t j = 0; j < xs.size(); ++j) {
        std::vector<double> xv;
        for (std::size_t r : cr.rows) xv.push_back(as_number(t.rows[r][cols[j + 1]]));
        auto [mn, mx] = std::minmax_element(xv.begin(), xv.end());
        AxisDomain ax;
        ax.name = xs[j];
        ax.lo = *mn;
        ax.hi = *mx;
        if (ax.lo == ax.hi) { // constant regressors never get here, but stay safe
            ax.lo -= 0.5;
            ax.hi += 0.5;
        }
        ax.grid_n = default_axis_grid(xs.size());
        m.domain.push_back(ax);
    }
    std::size_t cells = m.grid_size();
    m.grid.resize(cells);
    for (std::size_t idx = 0; idx < cells; ++idx) {
        std::size_t rest = idx;
        double yh = beta[0];
        for (std::size_t a = m.domain.size(); a-- > 0;) {
            auto ga = static_cast<std::size_t>(m.domain[a].grid_n);
            auto i = static_cast<int>(rest % ga);
            rest /= ga;
            yh += beta[a + 1] * m.axis_center(a, i);
        }
        m.grid[idx] = yh;
    }
    m.attachment = std::move(fit);

    double r2 = sst > 0.0 ? 1.0 - sse / sst : 1.0;
    Notes notes{{"y", y},
                {"xs", join(xs)},
                {"coefficients", join_numbers(beta)},
                {"r2", format_double(r2)},
                {"n", std::to_string(n)},
                {"dropped_missing", std::to_string(cr.dropped)}};
    return stamp(in, std::move(m), "predict_ols", node_id, std::move(notes));
}

// ------------------------------------------------------------- project_pca

Representation project_pca(const Representation& in, const std::vector<std::string>& columns,
                           std::size_t k, const std::string& node_id) {
    const Table& t = expect_sample(in, "project_pca");
    if (columns.empty()) throw ValidationError("project_pca needs at least one column");
    {
        std::set<std::string> uniq(columns.begin(), columns.end());
        if (uniq.size() != columns.size())
            throw ValidationError("project_pca has duplicate columns");
    }
    if (k < 1 || k > columns.size())
        throw ValidationError("project_pca needs 1 <= k <= " + std::to_string(columns.size()) +
                              ", got " + std::to_string(k));
    std::vector<std::size_t> cols;
    for (const auto& name : columns) {
        numeric_column(t, name, "project_pca");
        cols.push_back(t.column_index(name));
    }
    auto cr = complete_rows(t, cols);
    std::size_t n = cr.rows.size();
    if (n < 2) throw OpError("project_pca needs at least two rows");

    std::size_t d = columns.size();
    std::vector<double> means(d, 0.0);
    for (std::size_t r : cr.rows)
        for (std::size_t a = 0; a < d; ++a) means[a] += as_number(t.rows[r][cols[a]]);
    for (auto& mu : means) mu /= static_cast<double>(n);

    std::vector<std::vector<double>> X(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < d; ++a)
            X[i][a] = as_number(t.rows[cr.rows[i]][cols[a]]) - means[a];

    std::vector<std::vector<double>> C(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) C[a][b] += X[i][a] * X[i][b];
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b <= a; ++b) {
            C[a][b] = C[b][a] = C[b][a] / static_cast<double>(n - 1);
        }

    std::vector<std::vector<double>> loadings;
    std::vector<double> eigenvalues;
    for (std::size_t comp = 0; comp < k; ++comp) {
        auto [lambda, v] = power_iterate(C, loadings);
        // Sign convention: the largest-magnitude entry points positive.
        std::size_t big = 0;
        for (std::size_t i = 1; i < d; ++i)
            if (std::fabs(v[i]) > std::fabs(v[big])) big = i;
        if (v[big] < 0.0)
            for (auto& x : v) x = -x;
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) C[a][b] -= lambda * v[a] * v[b];
        eigenvalues.push_back(lambda);
        loadings.push_back(std::move(v));
    }

    Table emb;
    emb.source_id = t.source_id;
    for (std::size_t c = 0; c < k; ++c) {
        Column col;
        col.name = "pc" + std::to_string(c + 1);
        col.kind = ColumnKind::Continuous;
        emb.columns.push_back(col);
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Cell> row;
        for (std::size_t c = 0; c < k; ++c) row.push_back(Cell{dot(X[i], loadings[c])});
        emb.rows.push_back(std::move(row));
    }

    ModelRep m;
    m.evaluator = EvaluatorKind::PcaLoadings;
    for (std::size_t a = 0; a < d; ++a) {
        std::vector<double> xv;
        for (std::size_t r : cr.rows) xv.push_back(as_number(t.rows[r][cols[a]]));
        auto [mn, mx] = std::minmax_element(xv.begin(), xv.end());
        AxisDomain ax;
        ax.name = columns[a];
        ax.lo = *mn;
        ax.hi = *mx;
        if (ax.lo == ax.hi) { // constant axis: widen so the domain stays valid
            ax.lo -= 0.5;
            ax.hi += 0.5;
        }
        ax.grid_n = default_axis_grid(d);
        m.domain.push_back(ax);
    }
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t a = 0; a < d; ++a) {
            m.params.push_back(loadings[c][a]);
            m.param_names.push_back("loading(pc" + std::to_string(c + 1) + "," + columns[a] + ")");
        }
    for (std::size_t c = 0; c < k; ++c) {
        m.params.push_back(eigenvalues[c]);
        m.param_names.push_back("eigenvalue(pc" + std::to_string(c + 1) + ")");
    }
    for (std::size_t a = 0; a < d; ++a) {
        m.params.push_back(means[a]);
        m.param_names.push_back("mean(" + columns[a] + ")");
    }
    // Grid carries the leading component's score over the domain.
    std::size_t cells = m.grid_size();
    m.grid.resize(cells);
    for (std::size_t idx = 0; idx < cells; ++idx) {
        std::size_t rest = idx;
        double score = 0.0;
        for (std::size_t a = d; a-- > 0;) {
            auto ga = static_cast<std::size_t>(m.domain[a].grid_n);
            auto i = static_cast<int>(rest % ga);
            rest /= ga;
            score += loadings[0][a] * (m.axis_center(a, i) - means[a]);
        }
        m.grid[idx] = score;
    }
    m.attachment = std::move(emb);

    Notes notes{{"columns", join(columns)},
                {"k", std::to_string(k)},
                {"eigenvalues", join_numbers(eigenvalues)},
                {"n", std::to_string(n)},
                {"dropped_missing", std::to_string(cr.dropped)}};
    return stamp(in, std::move(m), "project_pca", node_id, std::move(notes));
}

} // namespace aperture::tactics
