#include "aperture/representation.hpp"

#include <cmath>

#include "aperture/error.hpp"
#include "aperture/format.hpp"

namespace aperture {

std::string group_key_label(const GroupKey& k) {
    if (std::holds_alternative<std::string>(k)) return std::get<std::string>(k);
    if (std::holds_alternative<double>(k)) return format_double(std::get<double>(k));
    return std::get<Interval>(k).label();
}

std::string Interval::label() const {
    std::string s;
    s += lo_closed ? '[' : '(';
    s += format_double(lo);
    s += ", ";
    s += format_double(hi);
    s += hi_closed ? ']' : ')';
    return s;
}

const char* evaluator_kind_name(EvaluatorKind k) {
    switch (k) {
        case EvaluatorKind::DensityGrid: return "density_grid";
        case EvaluatorKind::OlsLine: return "ols_line";
        case EvaluatorKind::PcaLoadings: return "pca_loadings";
        case EvaluatorKind::AdjustmentFn: return "adjustment_fn";
    }
    return "unknown";
}

const char* rep_kind_name(RepKind k) {
    switch (k) {
        case RepKind::Sample: return "sample";
        case RepKind::Summary: return "summary";
        case RepKind::Model: return "model";
    }
    return "unknown";
}

const char* family_name(Family f) {
    switch (f) {
        case Family::Full: return "full";
        case Family::Sampling: return "sampling";
        case Family::Summarizing: return "summarizing";
        case Family::Modeling: return "modeling";
    }
    return "unknown";
}

std::size_t ModelRep::grid_size() const {
    std::size_t n = 1;
    for (const auto& a : domain) n *= static_cast<std::size_t>(a.grid_n);
    return n;
}

double ModelRep::cell_volume() const {
    double v = 1.0;
    for (const auto& a : domain) v *= (a.hi - a.lo) / a.grid_n;
    return v;
}

double ModelRep::axis_center(std::size_t axis, int i) const {
    const AxisDomain& a = domain[axis];
    const double w = (a.hi - a.lo) / a.grid_n;
    return a.lo + (i + 0.5) * w;
}

Interval ModelRep::axis_cell_bounds(std::size_t axis, int i) const {
    const AxisDomain& a = domain[axis];
    const double w = (a.hi - a.lo) / a.grid_n;
    return Interval{a.lo + i * w, a.lo + (i + 1) * w, true, i + 1 == a.grid_n};
}

Representation Representation::with_entry(LineageEntry e) const& {
    Representation out = *this;
    out.lineage.push_back(std::move(e));
    return out;
}

Representation&& Representation::with_entry(LineageEntry e) && {
    lineage.push_back(std::move(e));
    return std::move(*this);
}

Representation make_sample(Table t) { return Representation{std::move(t), {}}; }
Representation make_summary(SummaryRep s) { return Representation{std::move(s), {}}; }
Representation make_model(ModelRep m) { return Representation{std::move(m), {}}; }

Family representation_family(const Representation& rep) {
    switch (rep.kind()) {
        case RepKind::Sample:
            return rep.lineage.empty() ? Family::Full : Family::Sampling;
        case RepKind::Summary:
            return Family::Summarizing;
        case RepKind::Model:
            return Family::Modeling;
    }
    return Family::Full;
}

void check_representation(const Representation& rep) {
    switch (rep.kind()) {
        case RepKind::Sample:
            rep.sample().check_invariants();
            break;
        case RepKind::Summary: {
            const SummaryRep& s = rep.summary();
            for (const auto& g : s.groups) {
                if (g.keys.size() != s.key_axes.size())
                    throw ValidationError("summary group key arity mismatch");
                if (g.stats.size() != s.stat_names.size())
                    throw ValidationError("summary group missing a declared stat");
            }
            if (!s.intervals_nested) {
                // Interval keys on the same axis must be pairwise disjoint.
                for (std::size_t a = 0; a < s.key_axes.size(); ++a) {
                    std::vector<Interval> seen;
                    for (const auto& g : s.groups) {
                        if (!std::holds_alternative<Interval>(g.keys[a])) continue;
                        const Interval& iv = std::get<Interval>(g.keys[a]);
                        for (const Interval& prior : seen) {
                            if (prior == iv) continue; // same bin, different combos
                            const double lo = std::max(prior.lo, iv.lo);
                            const double hi = std::min(prior.hi, iv.hi);
                            if (lo < hi)
                                throw ValidationError("overlapping intervals on axis '" +
                                                      s.key_axes[a].name + "'");
                        }
                        seen.push_back(iv);
                    }
                }
            }
            break;
        }
        case RepKind::Model: {
            const ModelRep& m = rep.model();
            if (m.domain.empty()) throw ValidationError("model has no domain axes");
            for (const auto& a : m.domain) {
                if (!(a.lo < a.hi))
                    throw ValidationError("model axis '" + a.name + "' needs lo < hi");
                if (a.grid_n < 2)
                    throw ValidationError("model axis '" + a.name + "' needs grid_n >= 2");
            }
            if (m.grid.size() != m.grid_size())
                throw ValidationError("model grid length != product of grid_n");
            if (m.params.size() != m.param_names.size())
                throw ValidationError("model params/param_names length mismatch");
            if (m.attachment) m.attachment->check_invariants();
            break;
        }
    }
}

} // namespace aperture
