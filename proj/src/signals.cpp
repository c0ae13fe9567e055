#include "aperture/signals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "aperture/error.hpp"
#include "aperture/format.hpp"
#include "aperture/stats.hpp"
#include "aperture/tactics.hpp"

namespace aperture {

using nlohmann::json;

// ------------------------------------------------------------- SignalSpec

const char* signal_kind_name(SignalSpec::Kind k) {
    switch (k) {
    case SignalSpec::Kind::Exceedance: return "exceedance";
    case SignalSpec::Kind::Quantile: return "quantile";
    case SignalSpec::Kind::ModeCount: return "mode_count";
    case SignalSpec::Kind::ClusterCount: return "cluster_count";
    case SignalSpec::Kind::ClusterSummary: return "cluster_summary";
    case SignalSpec::Kind::ReidentificationRisk: return "reidentification_risk";
    }
    return "?";
}

namespace {

SignalSpec::Kind kind_from_name(const std::string& name) {
    using K = SignalSpec::Kind;
    if (name == "exceedance") return K::Exceedance;
    if (name == "quantile") return K::Quantile;
    if (name == "mode_count") return K::ModeCount;
    if (name == "cluster_count") return K::ClusterCount;
    if (name == "cluster_summary") return K::ClusterSummary;
    if (name == "reidentification_risk") return K::ReidentificationRisk;
    throw ParseError("unknown signal kind '" + name + "'");
}

double need_signal_number(const json& j, const std::string& key) {
    if (!j.contains(key) || !j[key].is_number())
        throw ParseError("signal needs numeric '" + key + "'");
    return j[key].get<double>();
}

std::string join_columns(const std::vector<std::string>& cols) {
    std::string out;
    for (const auto& c : cols) out += (out.empty() ? "" : ", ") + c;
    return out;
}

} // namespace

SignalSpec SignalSpec::from_json(const json& j) {
    if (!j.is_object()) throw ParseError("signal must be an object");
    static const std::set<std::string> allowed{"kind", "id",         "column", "columns",
                                               "threshold", "p",     "prominence",
                                               "level",     "k"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key)) throw ParseError("signal has unknown key '" + key + "'");
    }
    if (!j.contains("kind") || !j["kind"].is_string())
        throw ParseError("signal needs a string 'kind'");

    SignalSpec s;
    s.kind = kind_from_name(j["kind"].get<std::string>());
    if (j.contains("id")) {
        if (!j["id"].is_string()) throw ParseError("signal 'id' must be a string");
        s.id = j["id"].get<std::string>();
    }
    if (j.contains("column") == j.contains("columns"))
        throw ParseError("signal needs exactly one of 'column' or 'columns'");
    if (j.contains("column")) {
        if (!j["column"].is_string()) throw ParseError("signal 'column' must be a string");
        s.columns = {j["column"].get<std::string>()};
    } else {
        if (!j["columns"].is_array() || j["columns"].empty())
            throw ParseError("signal 'columns' must be a non-empty array");
        for (const auto& c : j["columns"]) {
            if (!c.is_string()) throw ParseError("signal 'columns' entries must be strings");
            s.columns.push_back(c.get<std::string>());
        }
    }

    using K = SignalSpec::Kind;
    switch (s.kind) {
    case K::Exceedance:
        s.threshold = need_signal_number(j, "threshold");
        if (!std::isfinite(s.threshold)) throw ParseError("signal threshold must be finite");
        break;
    case K::Quantile:
        s.p = need_signal_number(j, "p");
        if (!(s.p >= 0.0 && s.p <= 1.0)) throw ParseError("signal p must lie in [0, 1]");
        break;
    case K::ModeCount:
        s.prominence = need_signal_number(j, "prominence");
        if (!(s.prominence >= 0.0)) throw ParseError("signal prominence must be >= 0");
        break;
    case K::ClusterCount:
    case K::ClusterSummary:
        s.level = need_signal_number(j, "level");
        if (!(s.level > 0.0 && s.level < 1.0))
            throw ParseError("signal level must lie in (0, 1)");
        break;
    case K::ReidentificationRisk: {
        double k = need_signal_number(j, "k");
        if (!(k >= 1.0) || k != std::floor(k))
            throw ParseError("signal k must be an integer >= 1");
        s.k = static_cast<std::size_t>(k);
        break;
    }
    }
    return s;
}

json SignalSpec::to_json() const {
    json j;
    j["kind"] = signal_kind_name(kind);
    if (!id.empty()) j["id"] = id;
    if (columns.size() == 1) j["column"] = columns[0];
    else j["columns"] = columns;
    using K = SignalSpec::Kind;
    switch (kind) {
    case K::Exceedance: j["threshold"] = threshold; break;
    case K::Quantile: j["p"] = p; break;
    case K::ModeCount: j["prominence"] = prominence; break;
    case K::ClusterCount:
    case K::ClusterSummary: j["level"] = level; break;
    case K::ReidentificationRisk: j["k"] = k; break;
    }
    return j;
}

std::string SignalSpec::describe() const {
    using K = SignalSpec::Kind;
    std::string cols = join_columns(columns);
    switch (kind) {
    case K::Exceedance: return "exceedance(" + cols + " > " + format_double(threshold) + ")";
    case K::Quantile: return "quantile(" + cols + ", p=" + format_double(p) + ")";
    case K::ModeCount:
        return "mode_count(" + cols + ", prominence=" + format_double(prominence) + ")";
    case K::ClusterCount: return "cluster_count(" + cols + ", level=" + format_double(level) + ")";
    case K::ClusterSummary:
        return "cluster_summary(" + cols + ", level=" + format_double(level) + ")";
    case K::ReidentificationRisk:
        return "reidentification_risk(" + cols + ", k=" + std::to_string(k) + ")";
    }
    return "?";
}

std::string SignalSpec::name() const { return id.empty() ? describe() : id; }

std::vector<SignalSpec> parse_signals(const json& arr) {
    if (!arr.is_array()) throw ParseError("'signals' must be an array");
    std::vector<SignalSpec> out;
    std::set<std::string> names;
    for (const auto& j : arr) {
        SignalSpec s = SignalSpec::from_json(j);
        if (!names.insert(s.name()).second)
            throw ParseError("duplicate signal '" + s.name() + "'");
        out.push_back(std::move(s));
    }
    return out;
}

// ------------------------------------------------------------ SignalValue

SignalValue SignalValue::none() { return SignalValue{}; }

SignalValue SignalValue::of(double v) {
    SignalValue s;
    s.kind = Kind::Number;
    s.number = v;
    return s;
}

SignalValue SignalValue::of(double v, double lo, double hi) {
    SignalValue s = of(v);
    s.bound = {lo, hi};
    return s;
}

SignalValue SignalValue::of_clusters(std::vector<ClusterInfo> cs) {
    SignalValue s;
    s.kind = Kind::Clusters;
    s.clusters = std::move(cs);
    return s;
}

// ------------------------------------------------------- grid evaluation

namespace {

// A uniform evaluation surface for density-flavored signals, built from a
// density-grid model, a binned summary or a KDE over a sample. Heights
// drive mode prominence (densities for grids, mass fractions for
// histograms, as each representation natively discloses); masses drive
// HDR clusters.
struct EvalGrid {
    std::vector<int> shape;
    std::vector<double> heights;
    std::vector<double> masses;
    std::vector<std::vector<double>> centers; // per axis, per cell
    std::vector<std::vector<Interval>> bounds; // per axis, per cell
};

std::vector<int> unravel(std::size_t flat, const std::vector<int>& shape) {
    std::vector<int> coord(shape.size());
    for (std::size_t a = shape.size(); a-- > 0;) {
        coord[a] = static_cast<int>(flat % static_cast<std::size_t>(shape[a]));
        flat /= static_cast<std::size_t>(shape[a]);
    }
    return coord;
}

// Prominence of every peak of a row-major height field (4-connectivity),
// by descending-height sweep: a peak is born where a cell has no higher
// neighbor and dies where its component merges into one with a higher
// summit; prominence = summit minus merge level. The surviving summit
// keeps its full height above zero.
std::vector<double> peak_persistences(const std::vector<double>& h,
                                      const std::vector<int>& shape) {
    const std::size_t n = h.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return h[a] > h[b]; });

    std::vector<std::ptrdiff_t> parent(n, -1);
    std::vector<double> summit_h(n, 0.0);
    std::vector<std::size_t> summit_i(n, 0);

    auto find = [&](std::size_t x) {
        std::size_t root = x;
        while (parent[root] != static_cast<std::ptrdiff_t>(root))
            root = static_cast<std::size_t>(parent[root]);
        while (parent[x] != static_cast<std::ptrdiff_t>(root)) {
            std::size_t next = static_cast<std::size_t>(parent[x]);
            parent[x] = static_cast<std::ptrdiff_t>(root);
            x = next;
        }
        return root;
    };

    std::vector<std::size_t> strides(shape.size(), 1);
    for (std::size_t a = shape.size(); a-- > 1;)
        strides[a - 1] = strides[a] * static_cast<std::size_t>(shape[a]);

    std::vector<double> out;
    for (std::size_t idx : order) {
        parent[idx] = static_cast<std::ptrdiff_t>(idx);
        summit_h[idx] = h[idx];
        summit_i[idx] = idx;

        std::vector<std::size_t> roots;
        auto coord = unravel(idx, shape);
        for (std::size_t a = 0; a < shape.size(); ++a) {
            for (int d : {-1, 1}) {
                int c = coord[a] + d;
                if (c < 0 || c >= shape[a]) continue;
                std::size_t nb = d < 0 ? idx - strides[a] : idx + strides[a];
                if (parent[nb] < 0) continue;
                std::size_t r = find(nb);
                if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
            }
        }
        if (roots.empty()) continue; // a new peak is born

        std::size_t best = roots[0];
        for (std::size_t r : roots)
            if (summit_h[r] > summit_h[best] ||
                (summit_h[r] == summit_h[best] && summit_i[r] < summit_i[best]))
                best = r;
        parent[idx] = static_cast<std::ptrdiff_t>(best);
        for (std::size_t r : roots) {
            if (r == best) continue;
            out.push_back(summit_h[r] - h[idx]); // this peak dies here
            parent[r] = static_cast<std::ptrdiff_t>(best);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (parent[i] == static_cast<std::ptrdiff_t>(i)) out.push_back(summit_h[i]);
    std::sort(out.begin(), out.end(), std::greater<double>());
    return out;
}

// Prominence is measured relative to the tallest peak so one parameter
// reads the same on count histograms and on density grids.
SignalValue grid_mode_count(const EvalGrid& g, double prominence) {
    double peak = 0.0;
    for (double h : g.heights) peak = std::max(peak, h);
    if (!(peak > 0.0)) return SignalValue::none();
    std::vector<double> scaled(g.heights.size());
    for (std::size_t i = 0; i < g.heights.size(); ++i) scaled[i] = g.heights[i] / peak;
    auto peaks = peak_persistences(scaled, g.shape);
    std::size_t count = 0;
    for (double p : peaks)
        if (p >= prominence) ++count;
    return SignalValue::of(static_cast<double>(count));
}

SignalValue grid_clusters(const EvalGrid& g, double level, bool count_only) {
    double total = std::accumulate(g.masses.begin(), g.masses.end(), 0.0);
    if (!(total > 0.0)) return SignalValue::none();
    std::vector<double> fractions(g.masses.size());
    for (std::size_t i = 0; i < g.masses.size(); ++i) fractions[i] = g.masses[i] / total;

    auto cells = hdr_prefix(fractions, level);
    auto comps = connected_components(cells, g.shape);
    if (count_only) return SignalValue::of(static_cast<double>(comps.size()));

    std::vector<ClusterInfo> infos;
    for (const auto& comp : comps) {
        ClusterInfo info;
        info.centroid.assign(g.shape.size(), 0.0);
        info.bbox.assign(g.shape.size(), Interval{});
        bool first = true;
        for (std::size_t flat : comp) {
            auto coord = unravel(flat, g.shape);
            double m = fractions[flat];
            info.mass += m;
            for (std::size_t a = 0; a < g.shape.size(); ++a) {
                info.centroid[a] += m * g.centers[a][static_cast<std::size_t>(coord[a])];
                Interval b = g.bounds[a][static_cast<std::size_t>(coord[a])];
                if (first) {
                    info.bbox[a] = Interval{b.lo, b.hi, true, true};
                } else {
                    info.bbox[a].lo = std::min(info.bbox[a].lo, b.lo);
                    info.bbox[a].hi = std::max(info.bbox[a].hi, b.hi);
                }
            }
            first = false;
        }
        if (info.mass > 0.0)
            for (double& c : info.centroid) c /= info.mass;
        infos.push_back(std::move(info));
    }
    return SignalValue::of_clusters(std::move(infos));
}

// Exceedance over a 1D binned mass sequence. Bins fully above the
// threshold count whole; a straddling bin contributes a linear share and
// widens the reported bracket by its full mass.
SignalValue mass_exceedance(const std::vector<Interval>& bins, const std::vector<double>& mass,
                            double t) {
    double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    if (!(total > 0.0)) return SignalValue::none();
    double above = 0.0, share = 0.0, straddle = 0.0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
        const Interval& b = bins[i];
        if (b.lo >= t) above += mass[i];
        else if (b.hi > t && b.width() > 0.0) {
            share += mass[i] * (b.hi - t) / b.width();
            straddle += mass[i];
        }
    }
    double value = (above + share) / total;
    if (straddle > 0.0)
        return SignalValue::of(value, above / total, (above + straddle) / total);
    return SignalValue::of(value);
}

// Quantile over a 1D binned mass sequence, linear within the crossing
// bin. The bracket is that bin: the exact sample quantile cannot leave it.
SignalValue mass_quantile(const std::vector<Interval>& bins, const std::vector<double>& mass,
                          double p, bool with_bound) {
    double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    if (!(total > 0.0)) return SignalValue::none();
    double cum = 0.0;
    std::size_t last_occupied = bins.size();
    for (std::size_t i = 0; i < bins.size(); ++i) {
        double f = mass[i] / total;
        if (f <= 0.0) continue;
        last_occupied = i;
        if (cum + f >= p) {
            double q = bins[i].lo + (p - cum) / f * bins[i].width();
            if (with_bound) return SignalValue::of(q, bins[i].lo, bins[i].hi);
            return SignalValue::of(q);
        }
        cum += f;
    }
    if (last_occupied == bins.size()) return SignalValue::none();
    const Interval& b = bins[last_occupied]; // p == 1 up to rounding
    if (with_bound) return SignalValue::of(b.hi, b.lo, b.hi);
    return SignalValue::of(b.hi);
}

// --------------------------------------------------------- grid builders

EvalGrid grid_of_model(const ModelRep& m) {
    EvalGrid g;
    for (const auto& ax : m.domain) g.shape.push_back(ax.grid_n);
    g.heights = m.grid;
    double vol = m.cell_volume();
    g.masses.resize(m.grid.size());
    for (std::size_t i = 0; i < m.grid.size(); ++i) g.masses[i] = m.grid[i] * vol;
    g.centers.resize(m.domain.size());
    g.bounds.resize(m.domain.size());
    for (std::size_t a = 0; a < m.domain.size(); ++a)
        for (int i = 0; i < m.domain[a].grid_n; ++i) {
            g.centers[a].push_back(m.axis_center(a, i));
            g.bounds[a].push_back(m.axis_cell_bounds(a, i));
        }
    return g;
}

// Collapses a multi-axis grid onto one axis by summing cell masses;
// heights become marginal densities.
EvalGrid marginal_grid(const EvalGrid& g, std::size_t axis) {
    EvalGrid out;
    out.shape = {g.shape[axis]};
    out.centers = {g.centers[axis]};
    out.bounds = {g.bounds[axis]};
    out.masses.assign(static_cast<std::size_t>(g.shape[axis]), 0.0);
    for (std::size_t flat = 0; flat < g.masses.size(); ++flat) {
        auto coord = unravel(flat, g.shape);
        out.masses[static_cast<std::size_t>(coord[axis])] += g.masses[flat];
    }
    out.heights.resize(out.masses.size());
    for (std::size_t i = 0; i < out.masses.size(); ++i) {
        double w = out.bounds[0][i].width();
        out.heights[i] = w > 0.0 ? out.masses[i] / w : 0.0;
    }
    return out;
}

// Maps the signal's target columns onto the model's axes: all axes (in
// domain order) or a single marginal.
std::optional<EvalGrid> model_grid_for(const ModelRep& m, const std::vector<std::string>& cols) {
    std::set<std::string> want(cols.begin(), cols.end());
    std::set<std::string> have;
    for (const auto& ax : m.domain) have.insert(ax.name);
    if (want == have) return grid_of_model(m);
    if (cols.size() == 1) {
        for (std::size_t a = 0; a < m.domain.size(); ++a)
            if (m.domain[a].name == cols[0]) return marginal_grid(grid_of_model(m), a);
    }
    return std::nullopt;
}

bool axis_matches(const std::string& axis, const std::string& column) {
    return axis == column || axis == column + "__bin";
}

std::optional<std::size_t> stat_index(const SummaryRep& s, const std::string& name) {
    for (std::size_t i = 0; i < s.stat_names.size(); ++i)
        if (s.stat_names[i] == name) return i;
    return std::nullopt;
}

// A one-axis count summary (classify → aggregate) as interval bins plus
// masses, with empty bins restored from the recorded bin list.
struct Histogram {
    std::vector<Interval> bins;
    std::vector<double> mass;
};

std::optional<Histogram> histogram_of(const SummaryRep& s, const std::string& column) {
    if (s.key_axes.size() != 1 || !axis_matches(s.key_axes[0].name, column)) return std::nullopt;
    if (s.key_axes[0].bins.empty()) return std::nullopt;
    auto count = stat_index(s, "count");
    if (!count) return std::nullopt;

    Histogram h;
    for (const auto& b : s.key_axes[0].bins) {
        h.bins.push_back(b.bounds);
        h.mass.push_back(0.0);
    }
    for (const auto& grp : s.groups) {
        if (grp.keys.size() != 1 || !std::holds_alternative<Interval>(grp.keys[0]))
            return std::nullopt;
        if (!is_number(grp.stats[*count])) continue;
        const Interval& key = std::get<Interval>(grp.keys[0]);
        for (std::size_t i = 0; i < h.bins.size(); ++i)
            if (h.bins[i] == key) {
                h.mass[i] += as_number(grp.stats[*count]);
                break;
            }
    }
    return h;
}

// A 1–2 axis count summary as an EvalGrid (masses over the full bin
// cross-product, empty cells zero). Heights are mass fractions.
std::optional<EvalGrid> summary_count_grid(const SummaryRep& s) {
    if (s.key_axes.empty() || s.key_axes.size() > 2) return std::nullopt;
    for (const auto& ax : s.key_axes)
        if (ax.bins.empty()) return std::nullopt;
    auto count = stat_index(s, "count");
    if (!count) return std::nullopt;

    EvalGrid g;
    std::size_t cells = 1;
    for (const auto& ax : s.key_axes) {
        g.shape.push_back(static_cast<int>(ax.bins.size()));
        cells *= ax.bins.size();
        std::vector<double> centers;
        std::vector<Interval> bounds;
        for (const auto& b : ax.bins) {
            centers.push_back((b.bounds.lo + b.bounds.hi) / 2.0);
            bounds.push_back(b.bounds);
        }
        g.centers.push_back(std::move(centers));
        g.bounds.push_back(std::move(bounds));
    }
    g.masses.assign(cells, 0.0);

    for (const auto& grp : s.groups) {
        if (!is_number(grp.stats[*count])) continue;
        std::size_t flat = 0;
        for (std::size_t a = 0; a < s.key_axes.size(); ++a) {
            if (!std::holds_alternative<Interval>(grp.keys[a])) return std::nullopt;
            const Interval& key = std::get<Interval>(grp.keys[a]);
            std::size_t idx = s.key_axes[a].bins.size();
            for (std::size_t i = 0; i < s.key_axes[a].bins.size(); ++i)
                if (s.key_axes[a].bins[i].bounds == key) {
                    idx = i;
                    break;
                }
            if (idx == s.key_axes[a].bins.size()) return std::nullopt;
            flat = flat * s.key_axes[a].bins.size() + idx;
        }
        g.masses[flat] += as_number(grp.stats[*count]);
    }
    double total = std::accumulate(g.masses.begin(), g.masses.end(), 0.0);
    g.heights.resize(g.masses.size());
    for (std::size_t i = 0; i < g.masses.size(); ++i)
        g.heights[i] = total > 0.0 ? g.masses[i] / total : 0.0;
    return g;
}

// summary_count_grid, but only when the signal's columns are exactly the
// summary's axes.
std::optional<EvalGrid> grid_of_summary(const SummaryRep& s, const std::vector<std::string>& cols) {
    if (cols.size() != s.key_axes.size()) return std::nullopt;
    for (const auto& ax : s.key_axes) {
        bool matched = false;
        for (const auto& c : cols) matched = matched || axis_matches(ax.name, c);
        if (!matched) return std::nullopt;
    }
    return summary_count_grid(s);
}

// The one-axis mass layout of `column`: directly for one-axis count
// summaries, by marginalizing the grid for two-axis ones. Either way the
// masses still bound threshold and quantile queries soundly.
std::optional<Histogram> marginal_histogram(const SummaryRep& s, const std::string& column) {
    if (auto h = histogram_of(s, column)) return h;
    if (s.key_axes.size() != 2) return std::nullopt;
    auto g = summary_count_grid(s);
    if (!g) return std::nullopt;
    for (std::size_t a = 0; a < s.key_axes.size(); ++a)
        if (axis_matches(s.key_axes[a].name, column)) {
            EvalGrid m = marginal_grid(*g, a);
            return Histogram{m.bounds[0], m.masses};
        }
    return std::nullopt;
}

// ------------------------------------------------------- per-kind, per-rep

SignalValue eval_on_sample(const SignalSpec& s, const Table& t, const Table* original);

// Density-mass band groups: clusters of the group whose level matches.
SignalValue band_clusters(const SummaryRep& rep, double level, bool count_only) {
    auto level_stat = stat_index(rep, "level");
    if (!level_stat || rep.grid_shape.empty()) return SignalValue::none();

    const SummaryGroup* match = nullptr;
    for (const auto& grp : rep.groups)
        if (is_number(grp.stats[*level_stat]) &&
            std::abs(as_number(grp.stats[*level_stat]) - level) <= 1e-9)
            match = &grp;
    if (!match) return SignalValue::none();

    std::vector<std::size_t> strides(rep.grid_shape.size(), 1);
    for (std::size_t a = rep.grid_shape.size(); a-- > 1;)
        strides[a - 1] = strides[a] * static_cast<std::size_t>(rep.grid_shape[a]);

    std::vector<std::size_t> flats;
    std::map<std::size_t, const RegionCell*> by_flat;
    for (const auto& rc : match->region) {
        std::size_t flat = 0;
        for (std::size_t a = 0; a < strides.size(); ++a)
            flat += static_cast<std::size_t>(rc.index[a]) * strides[a];
        flats.push_back(flat);
        by_flat[flat] = &rc;
    }
    std::sort(flats.begin(), flats.end());
    auto comps = connected_components(flats, rep.grid_shape);
    if (count_only) return SignalValue::of(static_cast<double>(comps.size()));

    std::vector<ClusterInfo> infos;
    for (const auto& comp : comps) {
        ClusterInfo info;
        info.centroid.assign(rep.grid_shape.size(), 0.0);
        info.bbox.assign(rep.grid_shape.size(), Interval{});
        bool first = true;
        for (std::size_t flat : comp) {
            const RegionCell& rc = *by_flat.at(flat);
            info.mass += rc.mass;
            for (std::size_t a = 0; a < rc.bounds.size(); ++a) {
                double center = (rc.bounds[a].lo + rc.bounds[a].hi) / 2.0;
                info.centroid[a] += rc.mass * center;
                if (first) {
                    info.bbox[a] = Interval{rc.bounds[a].lo, rc.bounds[a].hi, true, true};
                } else {
                    info.bbox[a].lo = std::min(info.bbox[a].lo, rc.bounds[a].lo);
                    info.bbox[a].hi = std::max(info.bbox[a].hi, rc.bounds[a].hi);
                }
            }
            first = false;
        }
        if (info.mass > 0.0)
            for (double& c : info.centroid) c /= info.mass;
        infos.push_back(std::move(info));
    }
    return SignalValue::of_clusters(std::move(infos));
}

SignalValue eval_on_summary(const SignalSpec& s, const SummaryRep& rep) {
    using K = SignalSpec::Kind;
    switch (s.kind) {
    case K::Exceedance: {
        auto h = marginal_histogram(rep, s.columns[0]);
        if (!h) return SignalValue::none();
        return mass_exceedance(h->bins, h->mass, s.threshold);
    }
    case K::Quantile: {
        if (auto h = marginal_histogram(rep, s.columns[0]))
            return mass_quantile(h->bins, h->mass, s.p, true);
        // Quantile bands carry their levels directly: interpolate between
        // the band's edges, which are exact at the recorded levels.
        auto lo = stat_index(rep, "level_lo");
        auto hi = stat_index(rep, "level_hi");
        if (!lo || !hi || rep.key_axes.size() != 1 ||
            !axis_matches(rep.key_axes[0].name, s.columns[0]))
            return SignalValue::none();
        for (const auto& grp : rep.groups) {
            if (!std::holds_alternative<Interval>(grp.keys[0])) continue;
            if (!is_number(grp.stats[*lo]) || !is_number(grp.stats[*hi])) continue;
            double llo = as_number(grp.stats[*lo]);
            double lhi = as_number(grp.stats[*hi]);
            if (s.p < llo || s.p > lhi) continue;
            const Interval& iv = std::get<Interval>(grp.keys[0]);
            double f = lhi > llo ? (s.p - llo) / (lhi - llo) : 0.0;
            return SignalValue::of(iv.lo + f * iv.width(), iv.lo, iv.hi);
        }
        return SignalValue::none();
    }
    case K::ModeCount: {
        if (auto h = marginal_histogram(rep, s.columns[0])) {
            double total = std::accumulate(h->mass.begin(), h->mass.end(), 0.0);
            if (!(total > 0.0)) return SignalValue::none();
            EvalGrid g;
            g.shape = {static_cast<int>(h->bins.size())};
            for (std::size_t i = 0; i < h->bins.size(); ++i) g.heights.push_back(h->mass[i] / total);
            return grid_mode_count(g, s.prominence);
        }
        if (auto g = grid_of_summary(rep, s.columns)) return grid_mode_count(*g, s.prominence);
        return SignalValue::none();
    }
    case K::ClusterCount:
    case K::ClusterSummary: {
        bool count_only = s.kind == K::ClusterCount;
        if (!rep.grid_shape.empty()) return band_clusters(rep, s.level, count_only);
        if (auto g = grid_of_summary(rep, s.columns)) return grid_clusters(*g, s.level, count_only);
        return SignalValue::none();
    }
    case K::ReidentificationRisk: {
        auto count = stat_index(rep, "count");
        if (!count || rep.groups.empty()) return SignalValue::none();
        double min_occupancy = 0.0;
        bool any = false;
        for (const auto& grp : rep.groups) {
            if (!is_number(grp.stats[*count])) continue;
            double c = as_number(grp.stats[*count]);
            if (!any || c < min_occupancy) min_occupancy = c;
            any = true;
        }
        if (!any) return SignalValue::none();
        return SignalValue::of(min_occupancy);
    }
    }
    return SignalValue::none();
}

SignalValue eval_on_grid(const SignalSpec& s, const EvalGrid& g) {
    using K = SignalSpec::Kind;
    switch (s.kind) {
    case K::Exceedance:
        if (g.shape.size() != 1) return SignalValue::none();
        return mass_exceedance(g.bounds[0], g.masses, s.threshold);
    case K::Quantile:
        if (g.shape.size() != 1) return SignalValue::none();
        return mass_quantile(g.bounds[0], g.masses, s.p, false);
    case K::ModeCount: return grid_mode_count(g, s.prominence);
    case K::ClusterCount: return grid_clusters(g, s.level, true);
    case K::ClusterSummary: return grid_clusters(g, s.level, false);
    case K::ReidentificationRisk: return SignalValue::none();
    }
    return SignalValue::none();
}

SignalValue eval_on_model(const SignalSpec& s, const ModelRep& m, const Table* original) {
    if (m.evaluator == EvaluatorKind::DensityGrid) {
        if (s.kind == SignalSpec::Kind::ReidentificationRisk) return SignalValue::none();
        auto g = model_grid_for(m, s.columns);
        if (!g) return SignalValue::none();
        return eval_on_grid(s, *g);
    }
    // Fitted lines, loadings and adjustments disclose data only through
    // their per-row attachment; evaluate on that when it carries the
    // target columns.
    if (!m.attachment) return SignalValue::none();
    for (const auto& c : s.columns)
        if (!m.attachment->find_column(c)) return SignalValue::none();
    return eval_on_sample(s, *m.attachment, original);
}

// Per-axis range normalization for the nearest-neighbor check, declared
// in the report: distances are Euclidean over disclosed-value ranges.
SignalValue reidentification_on_sample(const SignalSpec& s, const Table& disclosed,
                                       const Table& original) {
    std::vector<std::size_t> dcols, ocols;
    for (const auto& c : s.columns) {
        auto d = disclosed.find_column(c);
        auto o = original.find_column(c);
        if (!d || !o) return SignalValue::none();
        dcols.push_back(*d);
        ocols.push_back(*o);
    }
    // The self-match question needs row correspondence; row-dropping
    // tactics break it, so the signal becomes unanswerable.
    if (disclosed.row_count() != original.row_count()) return SignalValue::none();

    std::vector<std::size_t> paired;
    for (std::size_t r = 0; r < disclosed.row_count(); ++r) {
        bool complete = true;
        for (std::size_t a = 0; a < dcols.size(); ++a)
            complete = complete && is_number(disclosed.rows[r][dcols[a]]) &&
                       is_number(original.rows[r][ocols[a]]);
        if (complete) paired.push_back(r);
    }
    if (paired.empty()) return SignalValue::none();

    std::vector<double> scale(dcols.size(), 1.0);
    for (std::size_t a = 0; a < dcols.size(); ++a) {
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (std::size_t r : paired) {
            double v = as_number(disclosed.rows[r][dcols[a]]);
            lo = first ? v : std::min(lo, v);
            hi = first ? v : std::max(hi, v);
            first = false;
        }
        if (hi > lo) scale[a] = hi - lo;
    }

    auto dist2 = [&](std::size_t orig_row, std::size_t disc_row) {
        double d2 = 0.0;
        for (std::size_t a = 0; a < dcols.size(); ++a) {
            double d = (as_number(original.rows[orig_row][ocols[a]]) -
                        as_number(disclosed.rows[disc_row][dcols[a]])) /
                       scale[a];
            d2 += d * d;
        }
        return d2;
    };

    std::size_t matches = 0;
    for (std::size_t i : paired) {
        double own = dist2(i, i);
        double best = own;
        for (std::size_t j : paired) best = std::min(best, dist2(i, j));
        if (own <= best) ++matches; // ties count: the own image is among the nearest
    }
    return SignalValue::of(static_cast<double>(matches) / static_cast<double>(paired.size()));
}

SignalValue eval_on_sample(const SignalSpec& s, const Table& t, const Table* original) {
    using K = SignalSpec::Kind;
    switch (s.kind) {
    case K::Exceedance: {
        auto col = t.find_column(s.columns[0]);
        if (!col) return SignalValue::none();
        auto vals = t.numeric_values(*col);
        if (vals.empty()) return SignalValue::none();
        std::size_t above = 0;
        for (double v : vals)
            if (v > s.threshold) ++above;
        return SignalValue::of(static_cast<double>(above) / static_cast<double>(vals.size()));
    }
    case K::Quantile: {
        auto col = t.find_column(s.columns[0]);
        if (!col) return SignalValue::none();
        auto vals = t.numeric_values(*col);
        if (vals.empty()) return SignalValue::none();
        std::sort(vals.begin(), vals.end());
        return SignalValue::of(sorted_quantile(vals, s.p));
    }
    case K::ModeCount:
    case K::ClusterCount:
    case K::ClusterSummary: {
        // Row-level data answers density questions through an automatic-
        // bandwidth KDE on a fixed default grid.
        if (s.columns.size() > 2) return SignalValue::none();
        tactics::KdeSpec spec;
        spec.columns = s.columns;
        spec.grid_n = s.columns.size() == 1 ? std::vector<int>{64} : std::vector<int>{40, 40};
        try {
            Representation model = tactics::smooth_kde(make_sample(t), spec);
            return eval_on_grid(s, grid_of_model(model.model()));
        } catch (const Error&) {
            return SignalValue::none(); // degenerate data carries no density
        }
    }
    case K::ReidentificationRisk:
        return reidentification_on_sample(s, t, original ? *original : t);
    }
    return SignalValue::none();
}

} // namespace

SignalValue eval_signal(const SignalSpec& s, const Representation& rep, const Table* original) {
    switch (rep.kind()) {
    case RepKind::Sample: return eval_on_sample(s, rep.sample(), original);
    case RepKind::Summary: return eval_on_summary(s, rep.summary());
    case RepKind::Model: return eval_on_model(s, rep.model(), original);
    }
    return SignalValue::none();
}

// -------------------------------------------------------------- distortion

Distortion distortion(const SignalSpec& s, const Table& original,
                      const Representation& disclosed) {
    Distortion d;
    d.signal = s.name();
    d.on_original = eval_signal(s, tactics::full_disclosure(original), &original);
    d.on_disclosed = eval_signal(s, disclosed, &original);
    d.hidden = d.on_disclosed.unanswerable();
    if (d.on_original.numeric() && d.on_disclosed.numeric()) {
        double abs = std::abs(d.on_original.number - d.on_disclosed.number);
        d.abs_error = abs;
        // Relative error falls back to the absolute scale when the
        // original value is zero.
        double denom = std::abs(d.on_original.number);
        d.rel_error = abs / (denom > 0.0 ? denom : 1.0);
    }
    return d;
}

// ------------------------------------------------------------------ sweep

const Table& signal_original(const SignalSpec& s, const PipelineGraph& g,
                             const std::map<std::string, Table>& inputs) {
    for (const auto& n : g.nodes) {
        if (n.op != "source") continue;
        auto it = inputs.find(n.id);
        if (it == inputs.end()) continue;
        bool all = true;
        for (const auto& c : s.columns) all = all && it->second.find_column(c).has_value();
        if (all) return it->second;
    }
    throw ValidationError("no input table supplies the columns of signal '" + s.name() + "'");
}

namespace {

// Objective score per point; preserve wants it small, hide wants it
// large. Hidden counts as infinite error.
double objective_score(const Distortion& d) {
    if (d.hidden) return std::numeric_limits<double>::infinity();
    if (d.abs_error) return *d.abs_error;
    return 0.0;
}

} // namespace

std::vector<SweepPoint> sweep(const PipelineGraph& g, const std::vector<SweepParameter>& vary,
                              const std::vector<SweepObjective>& objectives,
                              const std::map<std::string, Table>& inputs, Seed seed) {
    std::size_t total = 1;
    for (const auto& v : vary) {
        const PipelineNode* n = g.find(v.node_id);
        if (!n) throw ValidationError("sweep parameter targets unknown node '" + v.node_id + "'");
        if (!n->params.contains(v.param))
            throw ValidationError("sweep parameter '" + v.node_id + "." + v.param +
                                  "' not found");
        if (v.values.empty())
            throw ValidationError("sweep parameter '" + v.node_id + "." + v.param +
                                  "' has no values");
        total *= v.values.size();
        if (total > 10000) throw ValidationError("sweep grid exceeds 10000 points");
    }
    for (const auto& o : objectives)
        if (o.signal.kind == SignalSpec::Kind::ClusterSummary)
            throw ValidationError("sweep objectives need numeric signals; '" +
                                  o.signal.name() + "' is structural");

    std::vector<const Table*> originals;
    for (const auto& o : objectives) originals.push_back(&signal_original(o.signal, g, inputs));

    std::vector<SweepPoint> points;
    std::vector<std::size_t> odometer(vary.size(), 0);
    while (true) {
        SweepPoint point;
        PipelineGraph varied = g;
        for (std::size_t i = 0; i < vary.size(); ++i) {
            double value = vary[i].values[odometer[i]];
            point.values.push_back(value);
            for (auto& n : varied.nodes) {
                if (n.id != vary[i].node_id) continue;
                json& slot = n.params[vary[i].param];
                if (slot.is_number_integer() && value == std::floor(value))
                    slot = static_cast<std::int64_t>(value);
                else slot = value;
            }
        }

        auto results = execute(varied, inputs, seed);
        for (std::size_t oi = 0; oi < objectives.size(); ++oi) {
            // Evaluate against the first output that answers; an output
            // that hides the signal only stands if every output hides it.
            std::optional<Distortion> chosen;
            for (const auto& out_id : varied.outputs) {
                const NodeOutput& out = results.at(out_id);
                std::vector<const Representation*> reps;
                if (std::holds_alternative<Representation>(out))
                    reps.push_back(&std::get<Representation>(out));
                else
                    for (const auto& member : std::get<LayerBundle>(out).members)
                        reps.push_back(&member);
                for (const Representation* rep : reps) {
                    Distortion d = distortion(objectives[oi].signal, *originals[oi], *rep);
                    if (!chosen || (chosen->hidden && !d.hidden)) chosen = std::move(d);
                    if (!chosen->hidden) break;
                }
                if (chosen && !chosen->hidden) break;
            }
            point.distortions.push_back(std::move(*chosen));
        }
        points.push_back(std::move(point));

        if (vary.empty()) break;
        std::size_t a = vary.size();
        bool rolled_over = true;
        while (a-- > 0) {
            if (++odometer[a] < vary[a].values.size()) {
                rolled_over = false;
                break;
            }
            odometer[a] = 0;
        }
        if (rolled_over) break;
    }

    // Pareto flags: dominated = some other point is at least as good on
    // every objective and strictly better on one.
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
            if (j == i) continue;
            bool weakly_all = true, strictly_one = false;
            for (std::size_t oi = 0; oi < objectives.size(); ++oi) {
                double si = objective_score(points[i].distortions[oi]);
                double sj = objective_score(points[j].distortions[oi]);
                bool hide = objectives[oi].goal == SweepObjective::Goal::Hide;
                if (!(hide ? sj >= si : sj <= si)) weakly_all = false;
                if (hide ? sj > si : sj < si) strictly_one = true;
            }
            dominated = weakly_all && strictly_one;
        }
        points[i].pareto = !dominated;
    }
    return points;
}

std::pair<std::vector<SweepParameter>, std::vector<SweepObjective>> parse_sweep_config(
    const json& j) {
    if (!j.is_object()) throw ParseError("sweep config must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "vary" && key != "objectives")
            throw ParseError("sweep config has unknown key '" + key + "'");
    }
    if (!j.contains("vary") || !j["vary"].is_array() || j["vary"].empty())
        throw ParseError("sweep config needs a non-empty 'vary' array");
    if (!j.contains("objectives") || !j["objectives"].is_array() || j["objectives"].empty())
        throw ParseError("sweep config needs a non-empty 'objectives' array");

    std::vector<SweepParameter> vary;
    for (const auto& v : j["vary"]) {
        if (!v.is_object()) throw ParseError("'vary' entries must be objects");
        for (const auto& [key, value] : v.items()) {
            (void)value;
            if (key != "node" && key != "param" && key != "values")
                throw ParseError("'vary' entry has unknown key '" + key + "'");
        }
        if (!v.contains("node") || !v["node"].is_string() || !v.contains("param") ||
            !v["param"].is_string() || !v.contains("values") || !v["values"].is_array())
            throw ParseError("'vary' entries need node, param and values");
        SweepParameter p;
        p.node_id = v["node"].get<std::string>();
        p.param = v["param"].get<std::string>();
        for (const auto& val : v["values"]) {
            if (!val.is_number()) throw ParseError("'vary' values must be numbers");
            p.values.push_back(val.get<double>());
        }
        vary.push_back(std::move(p));
    }

    std::vector<SweepObjective> objectives;
    for (const auto& o : j["objectives"]) {
        if (!o.is_object()) throw ParseError("'objectives' entries must be objects");
        for (const auto& [key, value] : o.items()) {
            (void)value;
            if (key != "signal" && key != "goal")
                throw ParseError("'objectives' entry has unknown key '" + key + "'");
        }
        if (!o.contains("signal") || !o.contains("goal") || !o["goal"].is_string())
            throw ParseError("'objectives' entries need signal and goal");
        SweepObjective obj;
        obj.signal = SignalSpec::from_json(o["signal"]);
        std::string goal = o["goal"].get<std::string>();
        if (goal == "preserve") obj.goal = SweepObjective::Goal::Preserve;
        else if (goal == "hide") obj.goal = SweepObjective::Goal::Hide;
        else throw ParseError("objective goal must be 'preserve' or 'hide'");
        objectives.push_back(std::move(obj));
    }
    return {std::move(vary), std::move(objectives)};
}

} // namespace aperture
