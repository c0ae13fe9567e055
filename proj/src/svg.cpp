#include "aperture/svg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "aperture/error.hpp"
#include "aperture/format.hpp"

namespace aperture {

const char* chart_kind_name(ChartKind k) {
    switch (k) {
    case ChartKind::Dotplot: return "dotplot";
    case ChartKind::Histogram: return "histogram";
    case ChartKind::Heatmap: return "heatmap";
    case ChartKind::ContourBand: return "contour-band";
    case ChartKind::Scatter: return "scatter";
    }
    return "?";
}

ChartKind chart_kind_from_name(const std::string& name) {
    if (name == "dotplot") return ChartKind::Dotplot;
    if (name == "histogram") return ChartKind::Histogram;
    if (name == "heatmap") return ChartKind::Heatmap;
    if (name == "contour-band") return ChartKind::ContourBand;
    if (name == "scatter") return ChartKind::Scatter;
    throw ParseError("unknown chart kind '" + name +
                     "' (dotplot, histogram, heatmap, contour-band, scatter)");
}

namespace {

bool numeric_kind(ColumnKind k) {
    return k == ColumnKind::Continuous || k == ColumnKind::Ordinal;
}

std::vector<std::size_t> numeric_columns(const Table& t) {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        if (numeric_kind(t.columns[c].kind)) out.push_back(c);
    return out;
}

// Pixel values rounded to 1/100 so shortest round-trip formatting stays
// compact and platform-stable.
std::string px(double v) { return format_double(std::round(v * 100.0) / 100.0); }

std::string escape_text(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '"') out += "&quot;";
        else out += c;
    }
    return out;
}

struct Domain {
    double lo = 0.0;
    double hi = 1.0;
    bool set = false;

    void include(double v) {
        lo = set ? std::min(lo, v) : v;
        hi = set ? std::max(hi, v) : v;
        set = true;
    }
    void pad() {
        if (!set) return;
        double w = hi - lo;
        if (w <= 0.0) w = hi != 0.0 ? std::abs(hi) : 1.0;
        lo -= 0.04 * w;
        hi += 0.04 * w;
    }
};

// Data-to-pixel frame for one document.
struct Frame {
    double x0, x1, y0, y1; // pixel corners (y0 = bottom, y1 = top)
    Domain dx, dy;
    std::string x_label, y_label;

    double sx(double v) const {
        return x0 + (v - dx.lo) / (dx.hi - dx.lo) * (x1 - x0);
    }
    double sy(double v) const {
        return y0 - (v - dy.lo) / (dy.hi - dy.lo) * (y0 - y1);
    }
};

std::string lerp_color(const std::string& hex, double frac) {
    if (hex.size() != 7 || hex[0] != '#') return hex;
    auto channel = [&](int offset) {
        int c = std::stoi(hex.substr(static_cast<std::size_t>(offset), 2), nullptr, 16);
        double v = 255.0 + (static_cast<double>(c) - 255.0) * frac;
        int out = static_cast<int>(std::lround(std::clamp(v, 0.0, 255.0)));
        static const char* digits = "0123456789abcdef";
        return std::string{digits[out / 16], digits[out % 16]};
    };
    return "#" + channel(1) + channel(3) + channel(5);
}

// ------------------------------------------------------------ validation

[[noreturn]] void incompatible(ChartKind kind, const Representation& rep,
                               const std::string& needs) {
    std::string compatible;
    switch (rep.kind()) {
    case RepKind::Sample: compatible = "dotplot, scatter"; break;
    case RepKind::Summary:
        compatible = rep.summary().grid_shape.empty() ? "histogram, heatmap" : "contour-band";
        break;
    case RepKind::Model: compatible = "none (serialize the model instead)"; break;
    }
    throw ValidationError(std::string(chart_kind_name(kind)) + " needs " + needs + "; this " +
                          rep_kind_name(rep.kind()) +
                          " input supports: " + compatible);
}

const Table& sample_for(ChartKind kind, const Representation& rep) {
    if (!rep.is_sample()) incompatible(kind, rep, "a row-level (Sample) input");
    return rep.sample();
}

const SummaryRep& summary_for(ChartKind kind, const Representation& rep,
                              const std::string& needs) {
    if (!rep.is_summary()) incompatible(kind, rep, needs);
    return rep.summary();
}

std::size_t pick_column(const Table& t, const std::string& wanted, std::size_t ordinal,
                        ChartKind kind) {
    if (!wanted.empty()) {
        auto idx = t.find_column(wanted);
        if (!idx || !numeric_kind(t.columns[*idx].kind))
            throw ValidationError(std::string(chart_kind_name(kind)) + " needs numeric column '" +
                                  wanted + "'");
        return *idx;
    }
    auto nums = numeric_columns(t);
    if (nums.size() <= ordinal)
        throw ValidationError(std::string(chart_kind_name(kind)) + " needs " +
                              std::to_string(ordinal + 1) + " numeric column(s)");
    return nums[ordinal];
}

// ------------------------------------------------------------ mark layers

struct Layer {
    const Representation* rep;
    ChartKind kind;
    std::string color;
};

// Per-kind domain contribution. Returns false when the layer has no
// shareable y positions (dotplot stacks, histogram bars).
bool extend_domains(const Layer& l, Frame& f, const SvgStyle& style) {
    switch (l.kind) {
    case ChartKind::Scatter: {
        const Table& t = l.rep->sample();
        std::size_t xc = pick_column(t, style.x_column, 0, l.kind);
        std::size_t yc = pick_column(t, style.y_column, 1, l.kind);
        if (f.x_label.empty()) f.x_label = t.columns[xc].name;
        if (f.y_label.empty()) f.y_label = t.columns[yc].name;
        for (const auto& row : t.rows) {
            if (!is_number(row[xc]) || !is_number(row[yc])) continue;
            f.dx.include(as_number(row[xc]));
            f.dy.include(as_number(row[yc]));
        }
        return true;
    }
    case ChartKind::Dotplot: {
        const Table& t = l.rep->sample();
        std::size_t xc = pick_column(t, style.x_column, 0, l.kind);
        if (f.x_label.empty()) f.x_label = t.columns[xc].name;
        for (const auto& row : t.rows)
            if (is_number(row[xc])) f.dx.include(as_number(row[xc]));
        return false;
    }
    case ChartKind::Histogram: {
        const SummaryRep& s = l.rep->summary();
        if (f.x_label.empty()) f.x_label = s.key_axes[0].name;
        for (const auto& g : s.groups)
            if (std::holds_alternative<Interval>(g.keys[0])) {
                const Interval& iv = std::get<Interval>(g.keys[0]);
                f.dx.include(iv.lo);
                f.dx.include(iv.hi);
            }
        return false;
    }
    case ChartKind::Heatmap: {
        const SummaryRep& s = l.rep->summary();
        if (f.x_label.empty()) f.x_label = s.key_axes[0].name;
        if (f.y_label.empty()) f.y_label = s.key_axes[1].name;
        for (const auto& g : s.groups) {
            if (std::holds_alternative<Interval>(g.keys[0])) {
                const Interval& iv = std::get<Interval>(g.keys[0]);
                f.dx.include(iv.lo);
                f.dx.include(iv.hi);
            }
            if (std::holds_alternative<Interval>(g.keys[1])) {
                const Interval& iv = std::get<Interval>(g.keys[1]);
                f.dy.include(iv.lo);
                f.dy.include(iv.hi);
            }
        }
        return true;
    }
    case ChartKind::ContourBand: {
        const SummaryRep& s = l.rep->summary();
        if (f.x_label.empty()) f.x_label = s.key_axes[0].name;
        if (f.y_label.empty() && s.key_axes.size() > 1) f.y_label = s.key_axes[1].name;
        for (const auto& g : s.groups)
            for (const auto& rc : g.region) {
                f.dx.include(rc.bounds[0].lo);
                f.dx.include(rc.bounds[0].hi);
                if (rc.bounds.size() > 1) {
                    f.dy.include(rc.bounds[1].lo);
                    f.dy.include(rc.bounds[1].hi);
                }
            }
        return true;
    }
    }
    return false;
}

std::optional<std::size_t> find_stat(const SummaryRep& s, const std::string& name) {
    for (std::size_t i = 0; i < s.stat_names.size(); ++i)
        if (s.stat_names[i] == name) return i;
    return std::nullopt;
}

void emit_marks(std::string& out, const Layer& l, const Frame& f, const SvgStyle& style) {
    switch (l.kind) {
    case ChartKind::Scatter: {
        const Table& t = l.rep->sample();
        std::size_t xc = pick_column(t, style.x_column, 0, l.kind);
        std::size_t yc = pick_column(t, style.y_column, 1, l.kind);
        for (const auto& row : t.rows) {
            if (!is_number(row[xc]) || !is_number(row[yc])) continue;
            out += "<circle cx=\"" + px(f.sx(as_number(row[xc]))) + "\" cy=\"" +
                   px(f.sy(as_number(row[yc]))) + "\" r=\"" + px(style.point_radius) +
                   "\" fill=\"" + l.color + "\" fill-opacity=\"0.75\"/>\n";
        }
        return;
    }
    case ChartKind::Dotplot: {
        const Table& t = l.rep->sample();
        std::size_t xc = pick_column(t, style.x_column, 0, l.kind);
        std::vector<double> vals;
        for (const auto& row : t.rows)
            if (is_number(row[xc])) vals.push_back(as_number(row[xc]));
        std::sort(vals.begin(), vals.end());
        double d = 2.0 * style.dot_radius;
        auto slots = static_cast<std::size_t>(std::max(1.0, std::floor((f.x1 - f.x0) / d)));
        std::map<std::size_t, int> stack;
        for (double v : vals) {
            double rel = (f.sx(v) - f.x0) / (f.x1 - f.x0);
            auto slot = static_cast<std::size_t>(std::clamp(
                std::floor(rel * static_cast<double>(slots)), 0.0,
                static_cast<double>(slots - 1)));
            int level = stack[slot]++;
            double cx = f.x0 + (static_cast<double>(slot) + 0.5) * d;
            double cy = f.y0 - style.dot_radius - static_cast<double>(level) * d;
            out += "<circle cx=\"" + px(cx) + "\" cy=\"" + px(cy) + "\" r=\"" +
                   px(style.dot_radius) + "\" fill=\"" + l.color + "\"/>\n";
        }
        return;
    }
    case ChartKind::Histogram: {
        const SummaryRep& s = l.rep->summary();
        auto count = find_stat(s, "count");
        double max_count = 0.0;
        if (count)
            for (const auto& g : s.groups)
                if (is_number(g.stats[*count])) max_count = std::max(max_count, as_number(g.stats[*count]));
        for (const auto& g : s.groups) {
            if (!std::holds_alternative<Interval>(g.keys[0])) continue;
            const Interval& iv = std::get<Interval>(g.keys[0]);
            double x = f.sx(iv.lo);
            double w = f.sx(iv.hi) - x;
            double h, y;
            if (count && max_count > 0.0 && is_number(g.stats[*count])) {
                h = as_number(g.stats[*count]) / max_count * (f.y0 - f.y1);
                y = f.y0 - h;
            } else {
                // Bands without counts render as a uniform strip.
                h = 0.35 * (f.y0 - f.y1);
                y = f.y1 + 0.325 * (f.y0 - f.y1);
            }
            out += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" + px(w) +
                   "\" height=\"" + px(h) + "\" fill=\"" + l.color +
                   "\" fill-opacity=\"0.8\" stroke=\"#ffffff\" stroke-width=\"0.5\"/>\n";
        }
        return;
    }
    case ChartKind::Heatmap: {
        const SummaryRep& s = l.rep->summary();
        auto count = find_stat(s, "count");
        double max_count = 0.0;
        if (count)
            for (const auto& g : s.groups)
                if (is_number(g.stats[*count])) max_count = std::max(max_count, as_number(g.stats[*count]));
        for (const auto& g : s.groups) {
            if (!std::holds_alternative<Interval>(g.keys[0]) ||
                !std::holds_alternative<Interval>(g.keys[1]))
                continue;
            const Interval& ix = std::get<Interval>(g.keys[0]);
            const Interval& iy = std::get<Interval>(g.keys[1]);
            double frac = 1.0;
            if (count && max_count > 0.0 && is_number(g.stats[*count]))
                frac = as_number(g.stats[*count]) / max_count;
            double x = f.sx(ix.lo);
            double y = f.sy(iy.hi);
            out += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" +
                   px(f.sx(ix.hi) - x) + "\" height=\"" + px(f.sy(iy.lo) - y) + "\" fill=\"" +
                   lerp_color(l.color, frac) + "\"/>\n";
        }
        return;
    }
    case ChartKind::ContourBand: {
        const SummaryRep& s = l.rep->summary();
        auto level = find_stat(s, "level");
        // Outer (high-mass) bands first so denser regions draw on top.
        std::vector<std::size_t> order(s.groups.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        if (level)
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                double la = is_number(s.groups[a].stats[*level]) ? as_number(s.groups[a].stats[*level]) : 0.0;
                double lb = is_number(s.groups[b].stats[*level]) ? as_number(s.groups[b].stats[*level]) : 0.0;
                return la > lb;
            });
        for (std::size_t oi = 0; oi < order.size(); ++oi) {
            const SummaryGroup& g = s.groups[order[oi]];
            double opacity = 0.3 + 0.5 * (order.empty() ? 1.0
                                                        : static_cast<double>(oi + 1) /
                                                              static_cast<double>(order.size()));
            for (const auto& rc : g.region) {
                double xlo = rc.bounds[0].lo, xhi = rc.bounds[0].hi;
                double ylo = rc.bounds.size() > 1 ? rc.bounds[1].lo : f.dy.lo;
                double yhi = rc.bounds.size() > 1 ? rc.bounds[1].hi : f.dy.hi;
                double x = f.sx(xlo);
                double y = f.sy(yhi);
                out += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" +
                       px(f.sx(xhi) - x) + "\" height=\"" + px(f.sy(ylo) - y) + "\" fill=\"" +
                       l.color + "\" fill-opacity=\"" + px(opacity) + "\"/>\n";
            }
        }
        return;
    }
    }
}

void check_layer(const Layer& l) {
    const Representation& rep = *l.rep;
    switch (l.kind) {
    case ChartKind::Dotplot:
    case ChartKind::Scatter: sample_for(l.kind, rep); return;
    case ChartKind::Histogram: {
        const SummaryRep& s = summary_for(l.kind, rep, "a Summary over one binned axis");
        if (s.key_axes.size() != 1 || !s.grid_shape.empty())
            incompatible(l.kind, rep, "a Summary over one binned axis");
        return;
    }
    case ChartKind::Heatmap: {
        const SummaryRep& s = summary_for(l.kind, rep, "a Summary over two binned axes");
        if (s.key_axes.size() != 2 || !s.grid_shape.empty())
            incompatible(l.kind, rep, "a Summary over two binned axes");
        return;
    }
    case ChartKind::ContourBand: {
        const SummaryRep& s =
            summary_for(l.kind, rep, "a Summary produced by density-mass banding");
        if (s.grid_shape.empty())
            incompatible(l.kind, rep, "a Summary produced by density-mass banding");
        return;
    }
    }
}

std::string render_layers(const std::vector<Layer>& layers, const SvgStyle& style) {
    for (const auto& l : layers) check_layer(l);

    Frame f;
    f.x0 = style.margin;
    f.x1 = style.width - style.margin;
    f.y0 = style.height - style.margin;
    f.y1 = style.margin;
    for (const auto& l : layers) extend_domains(l, f, style);
    if (!f.dx.set) f.dx = Domain{0.0, 1.0, true};
    if (!f.dy.set) f.dy = Domain{0.0, 1.0, true};
    f.dx.pad();
    f.dy.pad();

    bool y_positional = true;
    for (const auto& l : layers)
        y_positional = y_positional && l.kind != ChartKind::Dotplot &&
                       l.kind != ChartKind::Histogram;

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) +
           "\" height=\"" + std::to_string(style.height) + "\" viewBox=\"0 0 " +
           std::to_string(style.width) + " " + std::to_string(style.height) + "\">\n";
    out += "<rect width=\"" + std::to_string(style.width) + "\" height=\"" +
           std::to_string(style.height) + "\" fill=\"#ffffff\"/>\n";

    for (const auto& l : layers) emit_marks(out, l, f, style);

    // Axes on top of area marks, with min/max labels.
    out += "<g stroke=\"#333333\" stroke-width=\"1\">\n";
    out += "<line x1=\"" + px(f.x0) + "\" y1=\"" + px(f.y0) + "\" x2=\"" + px(f.x1) +
           "\" y2=\"" + px(f.y0) + "\"/>\n";
    out += "<line x1=\"" + px(f.x0) + "\" y1=\"" + px(f.y0) + "\" x2=\"" + px(f.x0) +
           "\" y2=\"" + px(f.y1) + "\"/>\n";
    out += "</g>\n";
    out += "<g font-family=\"sans-serif\" font-size=\"10\" fill=\"#333333\">\n";
    out += "<text x=\"" + px(f.x0) + "\" y=\"" + px(f.y0 + 14.0) + "\">" +
           escape_text(format_double(f.dx.lo)) + "</text>\n";
    out += "<text x=\"" + px(f.x1) + "\" y=\"" + px(f.y0 + 14.0) +
           "\" text-anchor=\"end\">" + escape_text(format_double(f.dx.hi)) + "</text>\n";
    if (!f.x_label.empty())
        out += "<text x=\"" + px((f.x0 + f.x1) / 2.0) + "\" y=\"" + px(f.y0 + 28.0) +
               "\" text-anchor=\"middle\">" + escape_text(f.x_label) + "</text>\n";
    if (y_positional) {
        out += "<text x=\"" + px(f.x0 - 4.0) + "\" y=\"" + px(f.y0) +
               "\" text-anchor=\"end\">" + escape_text(format_double(f.dy.lo)) + "</text>\n";
        out += "<text x=\"" + px(f.x0 - 4.0) + "\" y=\"" + px(f.y1 + 10.0) +
               "\" text-anchor=\"end\">" + escape_text(format_double(f.dy.hi)) + "</text>\n";
        if (!f.y_label.empty())
            out += "<text x=\"" + px(f.x0 - 4.0) + "\" y=\"" + px(f.y1 - 6.0) +
                   "\" text-anchor=\"end\">" + escape_text(f.y_label) + "</text>\n";
    }
    out += "</g>\n";
    out += "</svg>\n";
    return out;
}

const char* kPalette[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44"};

} // namespace

std::optional<ChartKind> default_chart_kind(const Representation& rep) {
    switch (rep.kind()) {
    case RepKind::Sample:
        return numeric_columns(rep.sample()).size() >= 2 ? ChartKind::Scatter
                                                         : ChartKind::Dotplot;
    case RepKind::Summary: {
        const SummaryRep& s = rep.summary();
        if (!s.grid_shape.empty()) return ChartKind::ContourBand;
        if (s.key_axes.size() == 2) return ChartKind::Heatmap;
        if (s.key_axes.size() == 1) return ChartKind::Histogram;
        return std::nullopt;
    }
    case RepKind::Model: return std::nullopt;
    }
    return std::nullopt;
}

std::string render_svg(const Representation& rep, ChartKind kind, const SvgStyle& style) {
    return render_layers({Layer{&rep, kind, style.color}}, style);
}

std::string render_svg(const LayerBundle& bundle, const SvgStyle& style) {
    if (bundle.members.empty()) throw ValidationError("cannot render an empty layer bundle");
    std::vector<Layer> layers;
    for (std::size_t i = 0; i < bundle.members.size(); ++i) {
        const Representation& rep = bundle.members[i];
        auto kind = default_chart_kind(rep);
        if (!kind)
            throw ValidationError("layer " + std::to_string(i) +
                                  " has no renderable chart kind (models are serialized, "
                                  "not drawn)");
        if (*kind == ChartKind::Dotplot || *kind == ChartKind::Histogram)
            throw ValidationError(
                "layer " + std::to_string(i) + " renders as " +
                chart_kind_name(*kind) +
                ", which cannot share a frame; layered charts need scatter, heatmap or "
                "contour-band members");
        layers.push_back(Layer{&rep, *kind, kPalette[i % 4]});
    }
    return render_layers(layers, style);
}

} // namespace aperture
