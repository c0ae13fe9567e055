#include "aperture/analysis.hpp"

#include <algorithm>

#include "aperture/error.hpp"
#include "aperture/expr.hpp"
#include "aperture/format.hpp"
#include "aperture/tactics.hpp"

namespace aperture {

using nlohmann::json;

const char* finding_category_name(FindingCategory c) {
    switch (c) {
    case FindingCategory::Confuser: return "Confuser";
    case FindingCategory::Jumbler: return "Jumbler";
    case FindingCategory::HallucinatorRisk: return "HallucinatorRisk";
    case FindingCategory::MisleaderRisk: return "MisleaderRisk";
    }
    return "?";
}

const char* column_status_name(ColumnStatus s) {
    switch (s) {
    case ColumnStatus::Revealed: return "revealed";
    case ColumnStatus::Distorted: return "distorted";
    case ColumnStatus::Hidden: return "hidden";
    }
    return "?";
}

const std::vector<RuleInfo>& rulebook() {
    static const std::vector<RuleInfo> rules{
        {"R1", FindingCategory::Confuser, "encode_select drops a column",
         "an omitted column cannot show its changes; viewers cannot tell it exists"},
        {"R2", FindingCategory::Confuser, "classify, aggregate or band partitions values",
         "values inside one partition are indistinguishable from each other"},
        {"R3", FindingCategory::Confuser, "smooth_kde is applied",
         "smoothing hides fine-grained structure below the bandwidth scale"},
        {"R4", FindingCategory::Jumbler, "magnitude_adjust is applied anywhere",
         "the adjustment weighting is opaque; displayed changes cannot be inverted"},
        {"R5", FindingCategory::Jumbler, "derive combines two or more columns",
         "a change in the derived value cannot be traced to one source column"},
        {"R6", FindingCategory::HallucinatorRisk, "an output has kind Sample",
         "row-level marks invite reading sampling and layout accidents as patterns"},
        {"R7", FindingCategory::MisleaderRisk,
         "classify bin count gives expected occupancy below the threshold",
         "sparsely occupied bins make noise look like structure"},
        {"R8", FindingCategory::Confuser, "subsample, noise or permute is applied",
         "individual marks carry imprecise or unrepresentative values"},
    };
    return rules;
}

namespace {

const RuleInfo& rule(const std::string& id) {
    for (const auto& r : rulebook())
        if (r.id == id) return r;
    throw OpError("unknown rule id '" + id + "'");
}

Finding make_finding(const std::string& rule_id, const std::string& node_id,
                     std::vector<std::string> subject, const std::string& detail) {
    const RuleInfo& r = rule(rule_id);
    Finding f;
    f.category = r.category;
    f.rule_id = rule_id;
    f.node_id = node_id;
    f.subject = std::move(subject);
    f.justification = r.description + (detail.empty() ? "" : ": " + detail);
    return f;
}

} // namespace

// ----------------------------------------------------------------- schemas

std::map<std::string, SourceSchema> declared_schemas(const PipelineGraph& g) {
    std::map<std::string, SourceSchema> out;
    for (const auto& n : g.nodes) {
        if (n.op != "source") continue;
        SourceSchema s;
        if (n.params.contains("columns"))
            s.columns = n.params["columns"].get<std::vector<std::string>>();
        if (n.params.contains("rows")) s.rows = n.params["rows"].get<std::size_t>();
        if (!s.columns.empty() || s.rows) out[n.id] = std::move(s);
    }
    return out;
}

std::map<std::string, SourceSchema> schemas_of_tables(
    const std::map<std::string, Table>& inputs) {
    std::map<std::string, SourceSchema> out;
    for (const auto& [id, t] : inputs) {
        SourceSchema s;
        for (const auto& c : t.columns) s.columns.push_back(c.name);
        s.rows = t.rows.size();
        out[id] = std::move(s);
    }
    return out;
}

// ----------------------------------------------------- static propagation

namespace {

// A named column visible at some node's output, with the original columns
// it derives from. `identity` means raw source values pass through, which
// only survives the identity-preserving ops (full_disclosure,
// encode_select keeps, combine).
struct Surface {
    std::string name;
    std::set<std::string> prov;
    bool identity = true;
    std::set<std::string> causes;
};

struct NodeState {
    std::vector<Surface> surfaces;
    std::map<std::string, std::set<std::string>> hidden; // original -> hiding nodes
    bool known = false; // false when no source schema was declared
};

const Surface* find_surface(const NodeState& s, const std::string& name) {
    for (const auto& sf : s.surfaces)
        if (sf.name == name) return &sf;
    return nullptr;
}

std::set<std::string> prov_of(const NodeState& s, const std::string& name) {
    const Surface* sf = find_surface(s, name);
    return sf ? sf->prov : std::set<std::string>{};
}

// Causes carried by the surface a rebuilt surface descends from, plus the
// rebuilding node itself: distortion history survives re-summarization.
std::set<std::string> causes_through(const NodeState& s, const std::string& name,
                                     const std::string& node_id) {
    std::set<std::string> causes;
    if (const Surface* sf = find_surface(s, name)) causes = sf->causes;
    causes.insert(node_id);
    return causes;
}

std::set<std::string> causes_union(const NodeState& s, const std::vector<std::string>& names,
                                   const std::string& node_id) {
    std::set<std::string> causes{node_id};
    for (const auto& name : names)
        if (const Surface* sf = find_surface(s, name))
            causes.insert(sf->causes.begin(), sf->causes.end());
    return causes;
}

std::set<std::string> present_originals(const NodeState& s) {
    std::set<std::string> out;
    for (const auto& sf : s.surfaces) out.insert(sf.prov.begin(), sf.prov.end());
    return out;
}

void touch_all(NodeState& s, const std::string& node) {
    for (auto& sf : s.surfaces) {
        sf.identity = false;
        sf.causes.insert(node);
    }
}

void note_hidden(NodeState& s, const std::set<std::string>& before, const std::string& node) {
    auto after = present_originals(s);
    for (const auto& col : before)
        if (!after.count(col)) s.hidden[col].insert(node);
}

NodeState transfer(const PipelineNode& n, const std::vector<const NodeState*>& in,
                   const std::map<std::string, SourceSchema>& schemas) {
    const json& p = n.params;

    if (n.op == "source") {
        NodeState s;
        auto it = schemas.find(n.id);
        if (it != schemas.end()) {
            s.known = true;
            for (const auto& c : it->second.columns)
                s.surfaces.push_back(Surface{c, {c}, true, {}});
        }
        return s;
    }

    if (n.op == "combine") {
        bool layer = p.at("mode").get<std::string>() == "layer";
        NodeState out;
        out.known = true;
        for (const auto* i : in) out.known = out.known && i->known;
        for (const auto* i : in) {
            for (const auto& sf : i->surfaces) {
                Surface* existing = nullptr;
                for (auto& o : out.surfaces)
                    if (o.name == sf.name) existing = &o;
                if (!existing) {
                    out.surfaces.push_back(sf);
                    continue;
                }
                existing->prov.insert(sf.prov.begin(), sf.prov.end());
                if (layer) {
                    // Layered members stay visually separable: the most
                    // disclosed member determines what a viewer can read.
                    if (sf.identity) {
                        existing->identity = true;
                        existing->causes.clear();
                    } else if (!existing->identity) {
                        existing->causes.insert(sf.causes.begin(), sf.causes.end());
                    }
                } else {
                    // Joined/concatenated rows mix indistinguishably, so the
                    // column is raw only if it is raw on every side.
                    bool both = existing->identity && sf.identity;
                    existing->causes.insert(sf.causes.begin(), sf.causes.end());
                    existing->identity = both;
                    if (both) existing->causes.clear();
                }
            }
        }
        auto present = present_originals(out);
        for (const auto* i : in)
            for (const auto& [col, causes] : i->hidden)
                if (!present.count(col)) out.hidden[col].insert(causes.begin(), causes.end());
        return out;
    }

    NodeState s = *in.at(0);
    if (!s.known) return s; // nothing to track without a schema

    auto before = present_originals(s);
    if (n.op == "full_disclosure") return s;

    if (n.op == "classify") {
        std::string col = p.at("column").get<std::string>();
        s.surfaces.push_back(
            Surface{col + "__bin", prov_of(s, col), false, causes_through(s, col, n.id)});
        touch_all(s, n.id);
        return s;
    }
    if (n.op == "categorize" || n.op == "subsample" || n.op == "noise" || n.op == "permute" ||
        n.op == "magnitude_adjust") {
        touch_all(s, n.id);
        return s;
    }
    if (n.op == "derive") {
        Expr e = Expr::parse(p.at("expression").get<std::string>());
        std::set<std::string> prov;
        for (const auto& ref : e.columns()) {
            auto pr = prov_of(s, ref);
            prov.insert(pr.begin(), pr.end());
        }
        s.surfaces.push_back(Surface{p.at("column").get<std::string>(), prov, false,
                                     causes_union(s, e.columns(), n.id)});
        touch_all(s, n.id);
        return s;
    }
    if (n.op == "encode_select") {
        auto keep = p.at("columns").get<std::vector<std::string>>();
        std::vector<Surface> kept;
        for (const auto& sf : s.surfaces)
            if (std::find(keep.begin(), keep.end(), sf.name) != keep.end())
                kept.push_back(sf); // identity-preserving for survivors
        s.surfaces = std::move(kept);
        note_hidden(s, before, n.id);
        return s;
    }
    if (n.op == "aggregate") {
        std::vector<Surface> next;
        for (const auto& gcol : p.at("group_by").get<std::vector<std::string>>())
            next.push_back(Surface{gcol, prov_of(s, gcol), false, causes_through(s, gcol, n.id)});
        for (const auto& stat : p.at("stats").get<std::vector<std::string>>()) {
            auto spec = tactics::StatSpec::parse(stat);
            bool is_count = spec.kind == tactics::StatSpec::Kind::Count;
            std::set<std::string> prov = is_count ? std::set<std::string>{}
                                                  : prov_of(s, spec.column);
            std::set<std::string> causes = is_count ? std::set<std::string>{n.id}
                                                    : causes_through(s, spec.column, n.id);
            next.push_back(Surface{spec.name(), std::move(prov), false, std::move(causes)});
        }
        s.surfaces = std::move(next);
        note_hidden(s, before, n.id);
        return s;
    }
    if (n.op == "band") {
        if (p.at("mode").get<std::string>() == "mass") {
            touch_all(s, n.id); // axes carry over as interval keys
            return s;
        }
        std::string col = p.at("column").get<std::string>();
        s.surfaces = {Surface{col, prov_of(s, col), false, causes_through(s, col, n.id)}};
        note_hidden(s, before, n.id);
        return s;
    }
    if (n.op == "smooth_kde") {
        std::vector<Surface> next;
        for (const auto& col : p.at("columns").get<std::vector<std::string>>())
            next.push_back(Surface{col, prov_of(s, col), false, causes_through(s, col, n.id)});
        s.surfaces = std::move(next);
        note_hidden(s, before, n.id);
        return s;
    }
    if (n.op == "predict_ols") {
        std::string y = p.at("y").get<std::string>();
        auto xs = p.at("xs").get<std::vector<std::string>>();
        std::set<std::string> prov = prov_of(s, y);
        for (const auto& x : xs) {
            auto pr = prov_of(s, x);
            prov.insert(pr.begin(), pr.end());
        }
        std::vector<std::string> sources = xs;
        sources.push_back(y);
        s.surfaces.push_back(
            Surface{y + "_fitted", std::move(prov), false, causes_union(s, sources, n.id)});
        touch_all(s, n.id); // the fitted table re-discloses all surviving rows
        return s;
    }
    if (n.op == "project_pca") {
        auto cols = p.at("columns").get<std::vector<std::string>>();
        std::set<std::string> prov;
        for (const auto& col : cols) {
            auto pr = prov_of(s, col);
            prov.insert(pr.begin(), pr.end());
        }
        auto k = p.at("k").get<std::size_t>();
        auto causes = causes_union(s, cols, n.id);
        std::vector<Surface> next;
        for (std::size_t i = 1; i <= k; ++i)
            next.push_back(Surface{"pc" + std::to_string(i), prov, false, causes});
        s.surfaces = std::move(next);
        note_hidden(s, before, n.id);
        return s;
    }
    throw ValidationError("unknown op '" + n.op + "'");
}

std::map<std::string, NodeState> propagate_states(const PipelineGraph& g,
                                                  const std::map<std::string, SourceSchema>& schemas) {
    std::map<std::string, NodeState> st;
    for (const auto& id : g.topo_order()) {
        std::vector<const NodeState*> in;
        for (const auto* e : g.in_edges(id)) in.push_back(&st.at(e->from));
        st[id] = transfer(g.node(id), in, schemas);
    }
    return st;
}

// Static row-count bound per node (exact for subsample, declared for
// sources, summed for concat; unknown elsewhere).
std::map<std::string, std::optional<std::size_t>> static_rows(
    const PipelineGraph& g, const std::map<std::string, SourceSchema>& schemas) {
    std::map<std::string, std::optional<std::size_t>> rows;
    for (const auto& id : g.topo_order()) {
        const PipelineNode& n = g.node(id);
        std::optional<std::size_t> r;
        if (n.op == "source") {
            auto it = schemas.find(id);
            if (it != schemas.end()) r = it->second.rows;
        } else if (n.op == "subsample") {
            r = n.params.at("n").get<std::size_t>();
        } else if (n.op == "classify" || n.op == "categorize" || n.op == "derive" ||
                   n.op == "encode_select" || n.op == "noise" || n.op == "permute" ||
                   n.op == "magnitude_adjust" || n.op == "full_disclosure") {
            auto in = g.in_edges(id);
            if (!in.empty()) r = rows.at(in[0]->from);
        } else if (n.op == "combine" &&
                   n.params.at("mode").get<std::string>() == "concat") {
            std::size_t total = 0;
            bool all = true;
            for (const auto* e : g.in_edges(id)) {
                auto up = rows.at(e->from);
                if (!up) all = false;
                else total += *up;
            }
            if (all) r = total;
        }
        rows[id] = r;
    }
    return rows;
}

void require_valid(const PipelineGraph& g) {
    auto errs = validate_pipeline(g);
    if (!errs.empty())
        throw ValidationError("node '" + errs[0].node_id + "': " + errs[0].message);
}

std::size_t static_bin_count(const json& bins) {
    if (bins.contains("edges")) return bins["edges"].size() - 1;
    if (bins.contains("equal_width")) return bins["equal_width"].get<std::size_t>();
    return bins["equal_frequency"].get<std::size_t>();
}

std::vector<std::string> surface_names(const NodeState& s) {
    std::vector<std::string> out;
    for (const auto& sf : s.surfaces) out.push_back(sf.name);
    return out;
}

} // namespace

// ------------------------------------------------------------------ rules

std::vector<Finding> detect_vulnerabilities(const PipelineGraph& g,
                                            const std::map<std::string, SourceSchema>& schemas,
                                            const AnalysisOptions& opts) {
    require_valid(g);
    auto states = propagate_states(g, schemas);
    auto rows = static_rows(g, schemas);
    auto kinds = inferred_kinds(g);

    std::vector<Finding> findings;
    for (const auto& id : g.topo_order()) {
        const PipelineNode& n = g.node(id);
        const json& p = n.params;
        auto in_edges = g.in_edges(id);
        const NodeState* in0 = in_edges.empty() ? nullptr : &states.at(in_edges[0]->from);

        if (n.op == "classify") {
            std::string col = p.at("column").get<std::string>();
            findings.push_back(make_finding("R2", id, {col}, "bins of '" + col + "'"));
            std::optional<std::size_t> in_rows;
            if (!in_edges.empty()) in_rows = rows.at(in_edges[0]->from);
            std::size_t b = static_bin_count(p.at("bins"));
            if (in_rows && b > 0) {
                double occupancy = static_cast<double>(*in_rows) / static_cast<double>(b);
                if (occupancy < static_cast<double>(opts.min_bin_occupancy))
                    findings.push_back(make_finding(
                        "R7", id, {col},
                        "expected occupancy " + format_double(occupancy) + " per bin (" +
                            std::to_string(*in_rows) + " rows / " + std::to_string(b) +
                            " bins) is below " + std::to_string(opts.min_bin_occupancy)));
            }
        } else if (n.op == "aggregate") {
            auto group_by = p.at("group_by").get<std::vector<std::string>>();
            findings.push_back(make_finding("R2", id, group_by, "groups over " +
                                                                    [&] {
                                                                        std::string s;
                                                                        for (const auto& c : group_by)
                                                                            s += (s.empty() ? "'" : ", '") + c + "'";
                                                                        return s;
                                                                    }()));
        } else if (n.op == "band") {
            std::vector<std::string> subject;
            if (p.at("mode").get<std::string>() == "mass") {
                if (in0) subject = surface_names(*in0);
            } else {
                subject = {p.at("column").get<std::string>()};
            }
            findings.push_back(make_finding("R2", id, subject, "interval bands"));
        } else if (n.op == "smooth_kde") {
            auto cols = p.at("columns").get<std::vector<std::string>>();
            findings.push_back(make_finding("R3", id, cols, ""));
        } else if (n.op == "magnitude_adjust") {
            findings.push_back(
                make_finding("R4", id, {p.at("value_column").get<std::string>()}, ""));
        } else if (n.op == "derive") {
            auto refs = Expr::parse(p.at("expression").get<std::string>()).columns();
            if (refs.size() >= 2)
                findings.push_back(make_finding(
                    "R5", id, refs, "expression '" + p.at("expression").get<std::string>() + "'"));
        } else if (n.op == "subsample") {
            std::vector<std::string> subject = in0 ? surface_names(*in0) : std::vector<std::string>{};
            findings.push_back(make_finding("R8", id, subject, "row subsampling"));
        } else if (n.op == "noise") {
            findings.push_back(make_finding(
                "R8", id, p.at("columns").get<std::vector<std::string>>(), "value perturbation"));
        } else if (n.op == "permute") {
            findings.push_back(make_finding("R8", id, {p.at("column").get<std::string>()},
                                            "within-column shuffling"));
        } else if (n.op == "encode_select") {
            if (in0 && in0->known) {
                auto keep = p.at("columns").get<std::vector<std::string>>();
                for (const auto& sf : in0->surfaces)
                    if (std::find(keep.begin(), keep.end(), sf.name) == keep.end())
                        findings.push_back(
                            make_finding("R1", id, {sf.name}, "drops '" + sf.name + "'"));
            }
        }
    }

    for (const auto& id : g.outputs)
        if (kinds.at(id) == StaticKind::Sample)
            findings.push_back(make_finding("R6", id, {}, "output is row-level"));

    return findings;
}

std::vector<Finding> detect_vulnerabilities(const PipelineGraph& g, const AnalysisOptions& opts) {
    return detect_vulnerabilities(g, declared_schemas(g), opts);
}

// ------------------------------------------------------------------ report

namespace {

// Every node id reachable upstream of `id`, inclusive.
std::set<std::string> ancestors(const PipelineGraph& g, const std::string& id) {
    std::set<std::string> seen{id};
    std::vector<std::string> stack{id};
    while (!stack.empty()) {
        std::string cur = stack.back();
        stack.pop_back();
        for (const auto& e : g.edges)
            if (e.to == cur && seen.insert(e.from).second) stack.push_back(e.from);
    }
    return seen;
}

std::string family_of(const PipelineGraph& g, const std::map<std::string, StaticKind>& kinds,
                      const std::string& id) {
    StaticKind k = kinds.at(id);
    if (k == StaticKind::Summary) return "summarizing";
    if (k == StaticKind::Model) return "modeling";
    if (k == StaticKind::Bundle) {
        std::string members;
        for (const auto* e : g.in_edges(id))
            members += (members.empty() ? "" : ",") + family_of(g, kinds, e->from);
        return "layer(" + members + ")";
    }
    for (const auto& a : ancestors(g, id)) {
        const std::string& op = g.node(a).op;
        if (op != "source" && op != "full_disclosure") return "sampling";
    }
    return "full";
}

} // namespace

DisclosureReport disclosure_report(const PipelineGraph& g,
                                   const std::map<std::string, SourceSchema>& schemas,
                                   const AnalysisOptions& opts) {
    require_valid(g);
    auto states = propagate_states(g, schemas);
    auto kinds = inferred_kinds(g);

    DisclosureReport report;
    report.findings = detect_vulnerabilities(g, schemas, opts);
    report.caveat =
        "Perceptual effects (scales, contrast, just-noticeable differences) are out of "
        "scope for this static analysis; a rendering can still confuse viewers even when "
        "every value is disclosed.";

    for (const auto& out_id : g.outputs) {
        OutputDisclosure od;
        od.output_id = out_id;
        od.kind = static_kind_name(kinds.at(out_id));
        od.family = family_of(g, kinds, out_id);

        const NodeState& state = states.at(out_id);
        if (state.known) {
            // Universe: declared columns of every source feeding this output,
            // in declaration order.
            auto up = ancestors(g, out_id);
            for (const auto& n : g.nodes) {
                if (n.op != "source" || !up.count(n.id)) continue;
                auto it = schemas.find(n.id);
                if (it == schemas.end()) continue;
                for (const auto& col : it->second.columns) {
                    ColumnDisclosure cd;
                    cd.column = col;
                    bool raw = false, present = false;
                    std::set<std::string> causes;
                    for (const auto& sf : state.surfaces) {
                        if (!sf.prov.count(col)) continue;
                        present = true;
                        if (sf.identity) raw = true;
                        else causes.insert(sf.causes.begin(), sf.causes.end());
                    }
                    if (raw) {
                        cd.status = ColumnStatus::Revealed;
                    } else if (present) {
                        cd.status = ColumnStatus::Distorted;
                        cd.causes.assign(causes.begin(), causes.end());
                    } else {
                        cd.status = ColumnStatus::Hidden;
                        auto hit = state.hidden.find(col);
                        if (hit != state.hidden.end())
                            cd.causes.assign(hit->second.begin(), hit->second.end());
                    }
                    od.columns.push_back(std::move(cd));
                }
            }
        }
        report.outputs.push_back(std::move(od));
    }
    return report;
}

} // namespace aperture
