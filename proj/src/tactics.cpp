#include "aperture/tactics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "aperture/error.hpp"
#include "aperture/expr.hpp"
#include "aperture/format.hpp"
#include "aperture/stats.hpp"
#include "tactics_detail.hpp"

namespace aperture::tactics {

using detail::Notes;
using detail::expect_sample;
using detail::join;
using detail::join_numbers;
using detail::numeric_column;
using detail::stamp;

namespace {

std::vector<double> nonmissing_values(const Table& t, std::size_t col) {
    std::vector<double> out;
    for (const auto& row : t.rows)
        if (is_number(row[col])) out.push_back(as_number(row[col]));
    return out;
}

// Bin intervals over ascending edges: right-open everywhere except the last
// bin, which closes on the right so the maximum lands inside.
std::vector<BinLabel> bins_from_edges(const std::vector<double>& edges) {
    std::vector<BinLabel> bins;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        Interval iv{edges[i], edges[i + 1], true, i + 2 == edges.size()};
        bins.push_back(BinLabel{iv.label(), iv});
    }
    return bins;
}

} // namespace

// ---------------------------------------------------------------- BinSpec

BinSpec BinSpec::from_edges(std::vector<double> e) {
    BinSpec s;
    s.mode = Mode::Edges;
    s.edges = std::move(e);
    return s;
}

BinSpec BinSpec::equal_width(int count, std::optional<std::pair<double, double>> range) {
    BinSpec s;
    s.mode = Mode::EqualWidth;
    s.count = count;
    s.range = range;
    return s;
}

BinSpec BinSpec::equal_frequency(int count) {
    BinSpec s;
    s.mode = Mode::EqualFrequency;
    s.count = count;
    return s;
}

std::string BinSpec::describe() const {
    switch (mode) {
    case Mode::Edges:
        return "edges(" + join_numbers(edges) + ")";
    case Mode::EqualWidth:
        if (range)
            return "equal_width(" + std::to_string(count) + "," +
                   format_double(range->first) + ".." + format_double(range->second) + ")";
        return "equal_width(" + std::to_string(count) + ")";
    case Mode::EqualFrequency:
        return "equal_frequency(" + std::to_string(count) + ")";
    }
    return "?";
}

// ---------------------------------------------------------------- StatSpec

StatSpec StatSpec::parse(const std::string& text) {
    StatSpec s;
    if (text == "count") {
        s.kind = Kind::Count;
        return s;
    }
    auto open = text.find('(');
    if (open == std::string::npos || text.back() != ')')
        throw ParseError("bad stat '" + text + "'");
    std::string head = text.substr(0, open);
    s.column = text.substr(open + 1, text.size() - open - 2);
    if (s.column.empty()) throw ParseError("bad stat '" + text + "'");
    if (head == "sum") s.kind = Kind::Sum;
    else if (head == "mean") s.kind = Kind::Mean;
    else if (head == "median") s.kind = Kind::Median;
    else if (head == "min") s.kind = Kind::Min;
    else if (head == "max") s.kind = Kind::Max;
    else if (head.size() > 1 && head[0] == 'q') {
        s.kind = Kind::Quantile;
        char* end = nullptr;
        s.p = std::strtod(head.c_str() + 1, &end);
        if (end != head.c_str() + head.size())
            throw ParseError("bad quantile stat '" + text + "'");
        if (s.p < 0.0 || s.p > 1.0)
            throw ValidationError("quantile level out of [0, 1] in '" + text + "'");
    } else {
        throw ParseError("unknown stat '" + head + "'");
    }
    return s;
}

std::string StatSpec::name() const {
    switch (kind) {
    case Kind::Count: return "count";
    case Kind::Sum: return "sum(" + column + ")";
    case Kind::Mean: return "mean(" + column + ")";
    case Kind::Median: return "median(" + column + ")";
    case Kind::Min: return "min(" + column + ")";
    case Kind::Max: return "max(" + column + ")";
    case Kind::Quantile: return "q" + format_double(p) + "(" + column + ")";
    }
    return "?";
}

double AdjustmentSpec::weight(double u) const {
    double w = 1.0 - u / u_max;
    return std::min(1.0, std::max(0.0, w));
}

// ---------------------------------------------------------------- classify

Representation classify(const Representation& in, const std::string& column,
                        const BinSpec& spec, const std::string& node_id) {
    const Table& t = expect_sample(in, "classify");
    std::size_t ci = t.column_index(column);
    numeric_column(t, column, "classify");
    std::string out_name = column + "__bin";
    if (t.find_column(out_name))
        throw ValidationError("column '" + out_name + "' already exists");

    std::vector<double> edges;
    std::vector<BinLabel> bins;

    switch (spec.mode) {
    case BinSpec::Mode::Edges: {
        edges = spec.edges;
        if (edges.size() < 2) throw ValidationError("classify needs at least two bin edges");
        for (std::size_t i = 0; i + 1 < edges.size(); ++i)
            if (!(edges[i] < edges[i + 1]))
                throw ValidationError("bin edges must be strictly ascending");
        bins = bins_from_edges(edges);
        break;
    }
    case BinSpec::Mode::EqualWidth: {
        if (spec.count < 1) throw ValidationError("bin count must be at least 1");
        double lo, hi;
        if (spec.range) {
            lo = spec.range->first;
            hi = spec.range->second;
        } else {
            auto vals = nonmissing_values(t, ci);
            if (vals.empty())
                throw ValidationError("classify on '" + column + "': no values to bin");
            auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
            lo = *mn;
            hi = *mx;
        }
        if (hi < lo) throw ValidationError("bin range must have lo <= hi");
        if (hi == lo && spec.count > 1)
            throw ValidationError("equal-width bins need a non-degenerate range");
        for (int i = 0; i <= spec.count; ++i)
            edges.push_back(lo + (hi - lo) * static_cast<double>(i) /
                                     static_cast<double>(spec.count));
        edges.back() = hi;
        if (hi == lo)
            bins.push_back(BinLabel{Interval{lo, hi, true, true}.label(),
                                    Interval{lo, hi, true, true}});
        else
            bins = bins_from_edges(edges);
        break;
    }
    case BinSpec::Mode::EqualFrequency: {
        if (spec.count < 1) throw ValidationError("bin count must be at least 1");
        auto vals = nonmissing_values(t, ci);
        std::sort(vals.begin(), vals.end());
        auto n = vals.size();
        if (n < static_cast<std::size_t>(spec.count))
            throw ValidationError("equal-frequency binning needs at least " +
                                  std::to_string(spec.count) + " values, got " +
                                  std::to_string(n));
        // Split points from sorted ranks floor(i*n/k); a value equal to a split
        // point belongs to the lower bin, so interiors close on the right.
        std::vector<double> cuts;
        for (int i = 1; i < spec.count; ++i) {
            std::size_t r = static_cast<std::size_t>(i) * n / static_cast<std::size_t>(spec.count);
            cuts.push_back(vals[r - 1]);
        }
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        // Heavily tied data can collapse split points; keep the distinct ones.
        double lo = vals.front(), hi = vals.back();
        while (!cuts.empty() && cuts.front() <= lo) cuts.erase(cuts.begin());
        while (!cuts.empty() && cuts.back() >= hi) cuts.pop_back();
        double prev = lo;
        bool prev_closed = true;
        for (double c : cuts) {
            Interval iv{prev, c, prev_closed, true};
            bins.push_back(BinLabel{iv.label(), iv});
            prev = c;
            prev_closed = false;
        }
        Interval last{prev, hi, prev_closed, true};
        bins.push_back(BinLabel{last.label(), last});
        break;
    }
    }

    Table out = t;
    Column label_col;
    label_col.name = out_name;
    label_col.kind = ColumnKind::Nominal;
    label_col.bins = bins;
    out.columns.push_back(label_col);

    std::size_t dropped_missing = 0, dropped_range = 0;
    std::vector<std::vector<Cell>> kept;
    for (const auto& row : t.rows) {
        if (is_missing(row[ci])) {
            ++dropped_missing;
            continue;
        }
        double v = as_number(row[ci]);
        const BinLabel* hit = nullptr;
        for (const auto& b : bins)
            if (b.bounds.contains(v)) {
                hit = &b;
                break;
            }
        if (!hit) { // outside the binned range
            ++dropped_range;
            continue;
        }
        auto r = row;
        r.push_back(Cell{hit->label});
        kept.push_back(std::move(r));
    }
    out.rows = std::move(kept);

    Notes notes{{"column", column},
                {"bins", spec.describe()},
                {"bin_count", std::to_string(bins.size())},
                {"dropped_missing", std::to_string(dropped_missing)}};
    if (dropped_range) notes.emplace_back("dropped_out_of_range", std::to_string(dropped_range));
    return stamp(in, std::move(out), "classify", node_id, std::move(notes));
}

// -------------------------------------------------------------- categorize

Representation categorize(const Representation& in, const std::string& column,
                          const std::map<std::string, std::string>& mapping,
                          const std::optional<std::string>& fallback,
                          const std::string& node_id) {
    const Table& t = expect_sample(in, "categorize");
    std::size_t ci = t.column_index(column);
    if (t.columns[ci].kind != ColumnKind::Nominal)
        throw ValidationError("categorize needs a nominal column, '" + column + "' is numeric");

    if (!fallback) {
        std::set<std::string> unmapped;
        for (const auto& row : t.rows)
            if (is_text(row[ci]) && !mapping.count(as_text(row[ci])))
                unmapped.insert(as_text(row[ci]));
        if (!unmapped.empty())
            throw ValidationError(
                "categorize leaves values unmapped with no default: " +
                join(std::vector<std::string>(unmapped.begin(), unmapped.end())));
    }

    Table out = t;
    out.columns[ci].bins.clear(); // regrouping invalidates any bin metadata
    out.rows.clear();
    std::size_t dropped_missing = 0;
    std::set<std::string> groups;
    for (const auto& row : t.rows) {
        if (is_missing(row[ci])) {
            ++dropped_missing;
            continue;
        }
        auto r = row;
        auto it = mapping.find(as_text(row[ci]));
        std::string g = it != mapping.end() ? it->second : *fallback;
        groups.insert(g);
        r[ci] = Cell{std::move(g)};
        out.rows.push_back(std::move(r));
    }

    Notes notes{{"column", column},
                {"groups", std::to_string(groups.size())},
                {"dropped_missing", std::to_string(dropped_missing)}};
    return stamp(in, std::move(out), "categorize", node_id, std::move(notes));
}

// --------------------------------------------------------------- aggregate

namespace {

struct KeyLess {
    bool less_interval(const Interval& a, const Interval& b) const {
        if (a.lo != b.lo) return a.lo < b.lo;
        if (a.hi != b.hi) return a.hi < b.hi;
        if (a.lo_closed != b.lo_closed) return a.lo_closed;
        return a.hi_closed && !b.hi_closed;
    }
    bool operator()(const GroupKey& a, const GroupKey& b) const {
        if (a.index() != b.index()) return a.index() < b.index();
        if (std::holds_alternative<double>(a))
            return std::get<double>(a) < std::get<double>(b);
        if (std::holds_alternative<std::string>(a))
            return std::get<std::string>(a) < std::get<std::string>(b);
        return less_interval(std::get<Interval>(a), std::get<Interval>(b));
    }
    bool operator()(const std::vector<GroupKey>& a, const std::vector<GroupKey>& b) const {
        for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
            if ((*this)(a[i], b[i])) return true;
            if ((*this)(b[i], a[i])) return false;
        }
        return a.size() < b.size();
    }
};

GroupKey cell_to_key(const Column& col, const Cell& cell) {
    if (is_number(cell)) return GroupKey{as_number(cell)};
    const std::string& label = as_text(cell);
    for (const auto& b : col.bins)
        if (b.label == label) return GroupKey{b.bounds};
    return GroupKey{label};
}

Cell eval_stat(const StatSpec& s, const Table& t, const std::vector<std::size_t>& rows) {
    if (s.kind == StatSpec::Kind::Count)
        return Cell{static_cast<double>(rows.size())};
    std::size_t ci = t.column_index(s.column);
    std::vector<double> vals;
    for (std::size_t r : rows)
        if (is_number(t.rows[r][ci])) vals.push_back(as_number(t.rows[r][ci]));
    if (vals.empty()) return missing_cell();
    switch (s.kind) {
    case StatSpec::Kind::Sum: {
        double acc = 0.0;
        for (double v : vals) acc += v;
        return Cell{acc};
    }
    case StatSpec::Kind::Mean: return Cell{mean_of(vals)};
    case StatSpec::Kind::Min: return Cell{*std::min_element(vals.begin(), vals.end())};
    case StatSpec::Kind::Max: return Cell{*std::max_element(vals.begin(), vals.end())};
    case StatSpec::Kind::Median:
        std::sort(vals.begin(), vals.end());
        return Cell{sorted_quantile(vals, 0.5)};
    case StatSpec::Kind::Quantile:
        std::sort(vals.begin(), vals.end());
        return Cell{sorted_quantile(vals, s.p)};
    default: return missing_cell();
    }
}

} // namespace

Representation aggregate(const Representation& in, const std::vector<std::string>& group_by,
                         const std::vector<StatSpec>& stats, const std::string& node_id) {
    const Table& t = expect_sample(in, "aggregate");
    if (stats.empty()) throw ValidationError("aggregate needs at least one stat");

    std::vector<std::size_t> key_cols;
    for (const auto& name : group_by) {
        std::size_t ci = t.column_index(name);
        if (t.columns[ci].kind == ColumnKind::Continuous)
            throw ValidationError("aggregate cannot group by continuous column '" + name +
                                  "'; classify it first");
        key_cols.push_back(ci);
    }
    for (const auto& s : stats)
        if (s.kind != StatSpec::Kind::Count) numeric_column(t, s.column, "aggregate");

    // One group per key combination present; missing keys drop the row.
    std::map<std::vector<GroupKey>, std::vector<std::size_t>, KeyLess> groups;
    std::size_t dropped_missing = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        bool miss = false;
        std::vector<GroupKey> key;
        key.reserve(key_cols.size());
        for (std::size_t ci : key_cols) {
            if (is_missing(t.rows[r][ci])) {
                miss = true;
                break;
            }
            key.push_back(cell_to_key(t.columns[ci], t.rows[r][ci]));
        }
        if (miss) {
            ++dropped_missing;
            continue;
        }
        groups[std::move(key)].push_back(r);
    }

    SummaryRep rep;
    for (std::size_t k = 0; k < group_by.size(); ++k)
        rep.key_axes.push_back(KeyAxis{group_by[k], t.columns[key_cols[k]].bins});
    for (const auto& s : stats) rep.stat_names.push_back(s.name());
    for (const auto& [key, rows] : groups) {
        SummaryGroup g;
        g.keys = key;
        for (const auto& s : stats) g.stats.push_back(eval_stat(s, t, rows));
        rep.groups.push_back(std::move(g));
    }

    std::vector<std::string> stat_names = rep.stat_names;
    Notes notes{{"group_by", join(group_by)},
                {"stats", join(stat_names)},
                {"groups", std::to_string(rep.groups.size())},
                {"dropped_missing", std::to_string(dropped_missing)}};
    return stamp(in, std::move(rep), "aggregate", node_id, std::move(notes));
}

// -------------------------------------------------------------------- band

Representation band(const Representation& in, const BandSpec& spec,
                    const std::string& node_id) {
    if (spec.levels.size() < (spec.mode == BandSpec::Mode::MassLevels ? 1u : 2u))
        throw ValidationError("band needs at least " +
                              std::string(spec.mode == BandSpec::Mode::MassLevels ? "one level"
                                                                                  : "two levels"));
    for (std::size_t i = 0; i + 1 < spec.levels.size(); ++i)
        if (!(spec.levels[i] < spec.levels[i + 1]))
            throw ValidationError("band levels must be strictly ascending");

    if (spec.mode == BandSpec::Mode::MassLevels) {
        if (in.kind() != RepKind::Model)
            throw ValidationError("band mass levels expect a model input");
        const ModelRep& m = in.model();
        if (m.evaluator != EvaluatorKind::DensityGrid)
            throw ValidationError("band mass levels need a density-grid model");
        for (double l : spec.levels)
            if (!(l > 0.0 && l < 1.0))
                throw ValidationError("mass levels must lie in (0, 1)");

        double vol = m.cell_volume();
        std::vector<double> masses(m.grid.size());
        for (std::size_t i = 0; i < m.grid.size(); ++i) masses[i] = m.grid[i] * vol;

        SummaryRep rep;
        for (const auto& ax : m.domain) rep.key_axes.push_back(KeyAxis{ax.name, {}});
        rep.stat_names = {"level", "mass"};
        rep.intervals_nested = spec.levels.size() > 1;
        for (const auto& ax : m.domain) rep.grid_shape.push_back(ax.grid_n);

        for (double level : spec.levels) {
            auto cells = hdr_prefix(masses, level);
            SummaryGroup g;
            double mass = 0.0;
            std::vector<Interval> bbox;
            for (std::size_t i = 0; i < m.domain.size(); ++i)
                bbox.push_back(Interval{0, 0, true, true});
            bool first = true;
            for (std::size_t idx : cells) {
                RegionCell rc;
                rc.density = m.grid[idx];
                rc.mass = masses[idx];
                mass += rc.mass;
                // Unravel the row-major index into per-axis cell coordinates.
                std::size_t rest = idx;
                std::vector<int> coord(m.domain.size());
                for (std::size_t a = m.domain.size(); a-- > 0;) {
                    coord[a] = static_cast<int>(rest % static_cast<std::size_t>(m.domain[a].grid_n));
                    rest /= static_cast<std::size_t>(m.domain[a].grid_n);
                }
                rc.index = coord;
                for (std::size_t a = 0; a < m.domain.size(); ++a) {
                    Interval b = m.axis_cell_bounds(a, coord[a]);
                    rc.bounds.push_back(b);
                    if (first) {
                        bbox[a] = b;
                    } else {
                        if (b.lo < bbox[a].lo) {
                            bbox[a].lo = b.lo;
                            bbox[a].lo_closed = b.lo_closed;
                        }
                        if (b.hi > bbox[a].hi) {
                            bbox[a].hi = b.hi;
                            bbox[a].hi_closed = b.hi_closed;
                        }
                    }
                }
                first = false;
                g.region.push_back(std::move(rc));
            }
            for (const auto& b : bbox) g.keys.push_back(GroupKey{b});
            g.stats = {Cell{level}, Cell{mass}};
            rep.groups.push_back(std::move(g));
        }

        Notes notes{{"mode", "mass"}, {"levels", join_numbers(spec.levels)}};
        return stamp(in, std::move(rep), "band", node_id, std::move(notes));
    }

    // Sample modes: quantile levels or explicit cut points over one column.
    const Table& t = expect_sample(in, "band");
    std::size_t ci = t.column_index(spec.column);
    numeric_column(t, spec.column, "band");

    std::vector<double> vals;
    std::size_t dropped_missing = 0;
    for (const auto& row : t.rows) {
        if (is_missing(row[ci])) {
            ++dropped_missing;
            continue;
        }
        vals.push_back(as_number(row[ci]));
    }

    std::vector<double> edges;
    if (spec.mode == BandSpec::Mode::Quantiles) {
        for (double l : spec.levels)
            if (l < 0.0 || l > 1.0)
                throw ValidationError("quantile levels must lie in [0, 1]");
        if (vals.empty()) throw ValidationError("band on '" + spec.column + "': no values");
        std::sort(vals.begin(), vals.end());
        for (double l : spec.levels) edges.push_back(sorted_quantile(vals, l));
    } else {
        edges = spec.levels;
    }

    SummaryRep rep;
    rep.key_axes.push_back(KeyAxis{spec.column, {}});
    if (spec.mode == BandSpec::Mode::Quantiles) rep.stat_names = {"level_lo", "level_hi"};
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        Interval iv{edges[i], edges[i + 1], true, i + 2 == edges.size()};
        rep.key_axes[0].bins.push_back(BinLabel{iv.label(), iv});
        SummaryGroup g;
        g.keys.push_back(GroupKey{iv});
        if (spec.mode == BandSpec::Mode::Quantiles)
            g.stats = {Cell{spec.levels[i]}, Cell{spec.levels[i + 1]}};
        rep.groups.push_back(std::move(g));
    }

    Notes notes{{"mode", spec.mode == BandSpec::Mode::Quantiles ? "quantiles" : "cuts"},
                {"column", spec.column},
                {"levels", join_numbers(spec.levels)},
                {"dropped_missing", std::to_string(dropped_missing)}};
    return stamp(in, std::move(rep), "band", node_id, std::move(notes));
}

// ------------------------------------------------------------------ derive

Representation derive(const Representation& in, const std::string& expr_text,
                      const std::string& out_column, const std::string& node_id) {
    const Table& t = expect_sample(in, "derive");
    if (out_column.empty()) throw ValidationError("derive needs an output column name");
    if (t.find_column(out_column))
        throw ValidationError("column '" + out_column + "' already exists");

    Expr expr = Expr::parse(expr_text);
    std::vector<std::size_t> input_cols;
    for (const auto& name : expr.columns()) {
        numeric_column(t, name, "derive");
        input_cols.push_back(t.column_index(name));
    }

    Table out = t;
    Column c;
    c.name = out_column;
    c.kind = ColumnKind::Continuous;
    out.columns.push_back(c);

    std::size_t non_finite = 0;
    std::vector<double> inputs(input_cols.size());
    for (auto& row : out.rows) {
        bool miss = false;
        for (std::size_t i = 0; i < input_cols.size(); ++i) {
            const Cell& cell = row[input_cols[i]];
            if (is_missing(cell)) {
                miss = true;
                break;
            }
            inputs[i] = as_number(cell);
        }
        if (miss) {
            row.push_back(missing_cell());
            continue;
        }
        double v = expr.eval(inputs);
        if (!std::isfinite(v)) {
            ++non_finite;
            row.push_back(missing_cell());
        } else {
            row.push_back(Cell{v});
        }
    }

    Notes notes{{"expression", expr_text},
                {"column", out_column},
                {"non_finite_results", std::to_string(non_finite)}};
    return stamp(in, std::move(out), "derive", node_id, std::move(notes));
}

// ----------------------------------------------------------- encode_select

Representation encode_select(const Representation& in, const std::vector<std::string>& columns,
                             const std::string& node_id) {
    if (columns.empty()) throw ValidationError("encode_select needs at least one column");
    std::set<std::string> want(columns.begin(), columns.end());
    if (want.size() != columns.size())
        throw ValidationError("encode_select has duplicate columns");

    if (in.kind() == RepKind::Sample) {
        const Table& t = in.sample();
        for (const auto& name : columns) t.column_index(name); // existence check
        Table out;
        out.source_id = t.source_id;
        std::vector<std::size_t> keep;
        std::vector<std::string> dropped;
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            if (want.count(t.columns[i].name)) {
                keep.push_back(i);
                out.columns.push_back(t.columns[i]);
            } else {
                dropped.push_back(t.columns[i].name);
            }
        }
        for (const auto& row : t.rows) {
            std::vector<Cell> r;
            r.reserve(keep.size());
            for (std::size_t i : keep) r.push_back(row[i]);
            out.rows.push_back(std::move(r));
        }
        Notes notes{{"kept", join(columns)}, {"dropped", join(dropped)}};
        return stamp(in, std::move(out), "encode_select", node_id, std::move(notes));
    }

    if (in.kind() == RepKind::Summary) {
        const SummaryRep& s = in.summary();
        for (const auto& ax : s.key_axes)
            if (!want.count(ax.name))
                throw ValidationError("encode_select cannot drop grouping axis '" + ax.name +
                                      "'");
        for (const auto& name : columns) {
            bool known = false;
            for (const auto& ax : s.key_axes) known = known || ax.name == name;
            for (const auto& sn : s.stat_names) known = known || sn == name;
            if (!known) throw ValidationError("unknown column '" + name + "'");
        }
        SummaryRep out = s;
        out.stat_names.clear();
        std::vector<std::size_t> keep;
        std::vector<std::string> dropped;
        for (std::size_t i = 0; i < s.stat_names.size(); ++i) {
            if (want.count(s.stat_names[i])) {
                keep.push_back(i);
                out.stat_names.push_back(s.stat_names[i]);
            } else {
                dropped.push_back(s.stat_names[i]);
            }
        }
        for (auto& g : out.groups) {
            std::vector<Cell> stats;
            stats.reserve(keep.size());
            for (std::size_t i : keep) stats.push_back(g.stats[i]);
            g.stats = std::move(stats);
        }
        Notes notes{{"kept", join(columns)}, {"dropped", join(dropped)}};
        return stamp(in, std::move(out), "encode_select", node_id, std::move(notes));
    }

    throw ValidationError("encode_select expects a sample or summary input");
}

// --------------------------------------------------------------- subsample

std::vector<std::size_t> shuffle_prefix(std::size_t N, std::size_t n, RngStream& rng) {
    std::vector<std::size_t> idx(N);
    for (std::size_t i = 0; i < N; ++i) idx[i] = i;
    for (std::size_t i = 0; i < n && i < N; ++i) {
        std::size_t j = i + rng.below(N - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    return idx;
}

Representation subsample(const Representation& in, std::size_t n, bool replacement, Seed seed,
                         const std::string& node_id) {
    const Table& t = expect_sample(in, "subsample");
    std::size_t N = t.rows.size();
    if (!replacement && n > N)
        throw ValidationError("subsample without replacement cannot draw " + std::to_string(n) +
                              " rows from " + std::to_string(N));
    if (replacement && N == 0 && n > 0)
        throw OpError("subsample cannot draw from an empty table");

    RngStream rng(seed);
    Table out = t;
    out.rows.clear();
    if (replacement) {
        for (std::size_t i = 0; i < n; ++i) out.rows.push_back(t.rows[rng.below(N)]);
    } else {
        for (std::size_t i : shuffle_prefix(N, n, rng)) out.rows.push_back(t.rows[i]);
    }

    Notes notes{{"n", std::to_string(n)},
                {"replacement", replacement ? "true" : "false"},
                {"seed", std::to_string(seed.value)}};
    return stamp(in, std::move(out), "subsample", node_id, std::move(notes));
}

// ------------------------------------------------------------------- noise

Representation noise(const Representation& in, const NoiseModel& model, Seed seed,
                     const std::string& node_id) {
    const Table& t = expect_sample(in, "noise");
    if (model.columns.empty()) throw ValidationError("noise needs at least one column");
    if (model.param < 0.0) throw ValidationError("noise scale must be non-negative");
    std::vector<std::size_t> cols;
    for (const auto& name : model.columns) {
        numeric_column(t, name, "noise");
        cols.push_back(t.column_index(name));
    }

    Table out = t;
    out.rows.clear();
    std::size_t dropped_missing = 0;
    RngStream rng(seed);
    for (const auto& row : t.rows) {
        bool miss = false;
        for (std::size_t ci : cols) miss = miss || is_missing(row[ci]);
        if (miss) {
            ++dropped_missing;
            continue;
        }
        auto r = row;
        if (model.param > 0.0) {
            for (std::size_t ci : cols) {
                double v = as_number(r[ci]);
                double dz = model.family == NoiseModel::Family::Gaussian
                                ? model.param * rng.normal()
                                : rng.laplace(model.param);
                r[ci] = Cell{v + dz};
            }
        }
        out.rows.push_back(std::move(r));
    }

    Notes notes{{"family", model.family == NoiseModel::Family::Gaussian ? "gaussian" : "laplace"},
                {"scale", format_double(model.param)},
                {"columns", join(model.columns)},
                {"seed", std::to_string(seed.value)},
                {"dropped_missing", std::to_string(dropped_missing)}};
    return stamp(in, std::move(out), "noise", node_id, std::move(notes));
}

// ----------------------------------------------------------------- permute

Representation permute(const Representation& in, const std::string& column, Seed seed,
                       const std::string& node_id) {
    const Table& t = expect_sample(in, "permute");
    std::size_t ci = t.column_index(column);

    RngStream rng(seed);
    auto order = shuffle_prefix(t.rows.size(), t.rows.size(), rng);
    Table out = t;
    for (std::size_t i = 0; i < order.size(); ++i) out.rows[i][ci] = t.rows[order[i]][ci];

    Notes notes{{"column", column}, {"seed", std::to_string(seed.value)}};
    return stamp(in, std::move(out), "permute", node_id, std::move(notes));
}

// --------------------------------------------------------- full_disclosure

Representation full_disclosure(const Table& t) {
    t.check_invariants();
    return make_sample(t); // identity: empty lineage keeps the family "full"
}

} // namespace aperture::tactics
