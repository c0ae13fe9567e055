#include "aperture/pipeline.hpp"

#include <algorithm>
#include <set>

#include "aperture/error.hpp"
#include "aperture/expr.hpp"
#include "aperture/tactics.hpp"

namespace aperture {

using nlohmann::json;

// ----------------------------------------------------------------- graph

const PipelineNode* PipelineGraph::find(const std::string& id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

const PipelineNode& PipelineGraph::node(const std::string& id) const {
    const PipelineNode* n = find(id);
    if (!n) throw ValidationError("no node with id '" + id + "'");
    return *n;
}

std::vector<const PipelineEdge*> PipelineGraph::in_edges(const std::string& id) const {
    std::vector<const PipelineEdge*> in;
    for (const auto& e : edges)
        if (e.to == id) in.push_back(&e);
    std::sort(in.begin(), in.end(),
              [](const PipelineEdge* a, const PipelineEdge* b) { return a->slot < b->slot; });
    return in;
}

std::vector<std::string> PipelineGraph::topo_order() const {
    std::map<std::string, int> indeg;
    for (const auto& n : nodes) indeg[n.id] = 0;
    for (const auto& e : edges) ++indeg[e.to];
    std::vector<std::string> order;
    std::vector<char> emitted(nodes.size(), 0);
    // Scan in declaration order among ready nodes, so the order (and
    // therefore everything downstream) is deterministic.
    while (order.size() < nodes.size()) {
        bool progress = false;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (emitted[i] || indeg[nodes[i].id] != 0) continue;
            emitted[i] = 1;
            progress = true;
            order.push_back(nodes[i].id);
            for (const auto& e : edges)
                if (e.from == nodes[i].id) --indeg[e.to];
        }
        if (!progress) {
            std::string stuck;
            for (std::size_t i = 0; i < nodes.size(); ++i)
                if (!emitted[i]) stuck += (stuck.empty() ? "" : ", ") + nodes[i].id;
            throw ParseError("pipeline has a cycle involving: " + stuck);
        }
    }
    return order;
}

std::vector<std::string> PipelineGraph::source_ids() const {
    std::vector<std::string> out;
    for (const auto& n : nodes)
        if (n.op == "source") out.push_back(n.id);
    return out;
}

// ------------------------------------------------------------------ parse

namespace {

const std::set<std::string>& known_ops() {
    static const std::set<std::string> ops{
        "source",      "classify",     "categorize",  "aggregate",
        "band",        "derive",       "encode_select", "subsample",
        "noise",       "permute",      "smooth_kde",  "magnitude_adjust",
        "predict_ols", "project_pca",  "full_disclosure", "combine"};
    return ops;
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ParseError("unknown key '" + it.key() + "'", where);
}

} // namespace

PipelineGraph parse_pipeline(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!doc.is_object()) throw ParseError("pipeline document must be a JSON object");
    reject_unknown_keys(doc, {"nodes", "edges", "outputs", "signals", "description"},
                        "top level");
    if (!doc.contains("nodes") || !doc["nodes"].is_array())
        throw ParseError("pipeline needs a 'nodes' array");
    if (!doc.contains("outputs") || !doc["outputs"].is_array())
        throw ParseError("pipeline needs an 'outputs' array");

    PipelineGraph g;
    std::set<std::string> ids;
    for (const auto& jn : doc["nodes"]) {
        if (!jn.is_object()) throw ParseError("each node must be an object");
        reject_unknown_keys(jn, {"id", "op", "params", "description"}, "node");
        if (!jn.contains("id") || !jn["id"].is_string() || jn["id"].get<std::string>().empty())
            throw ParseError("each node needs a non-empty string 'id'");
        if (!jn.contains("op") || !jn["op"].is_string())
            throw ParseError("each node needs a string 'op'");
        PipelineNode n;
        n.id = jn["id"].get<std::string>();
        n.op = jn["op"].get<std::string>();
        if (!known_ops().count(n.op))
            throw ParseError("unknown op '" + n.op + "'", "node '" + n.id + "'");
        if (!ids.insert(n.id).second) throw ParseError("duplicate node id '" + n.id + "'");
        n.params = jn.contains("params") ? jn["params"] : json::object();
        if (!n.params.is_object())
            throw ParseError("'params' must be an object", "node '" + n.id + "'");
        g.nodes.push_back(std::move(n));
    }

    if (doc.contains("edges")) {
        if (!doc["edges"].is_array()) throw ParseError("'edges' must be an array");
        for (const auto& je : doc["edges"]) {
            if (!je.is_array() || je.size() != 3 || !je[0].is_string() || !je[1].is_string() ||
                !je[2].is_number_integer())
                throw ParseError("each edge must be [from, to, slot]");
            PipelineEdge e;
            e.from = je[0].get<std::string>();
            e.to = je[1].get<std::string>();
            e.slot = je[2].get<int>();
            if (e.slot < 0) throw ParseError("edge slot must be non-negative");
            if (!ids.count(e.from)) throw ParseError("edge references unknown id '" + e.from + "'");
            if (!ids.count(e.to)) throw ParseError("edge references unknown id '" + e.to + "'");
            g.edges.push_back(std::move(e));
        }
    }

    for (const auto& jo : doc["outputs"]) {
        if (!jo.is_string()) throw ParseError("'outputs' entries must be node ids");
        std::string id = jo.get<std::string>();
        if (!ids.count(id)) throw ParseError("output references unknown id '" + id + "'");
        if (std::find(g.outputs.begin(), g.outputs.end(), id) != g.outputs.end())
            throw ParseError("duplicate output id '" + id + "'");
        g.outputs.push_back(std::move(id));
    }
    if (g.outputs.empty()) throw ParseError("pipeline needs at least one output");

    if (doc.contains("signals")) {
        if (!doc["signals"].is_array()) throw ParseError("'signals' must be an array");
        for (const auto& js : doc["signals"]) g.signals.push_back(js);
    }

    // Structural checks: per-node input slots contiguous and arity-correct.
    for (const auto& n : g.nodes) {
        auto in = g.in_edges(n.id);
        for (std::size_t i = 0; i < in.size(); ++i)
            if (in[i]->slot != static_cast<int>(i))
                throw ParseError("input slots must be 0..k-1 with no gaps or repeats",
                                 "node '" + n.id + "'");
        std::size_t want_min = 1, want_max = 1;
        if (n.op == "source") want_min = want_max = 0;
        if (n.op == "combine") {
            want_min = 2;
            want_max = static_cast<std::size_t>(-1);
        }
        if (in.size() < want_min || in.size() > want_max)
            throw ParseError(n.op + " takes " +
                                 (n.op == "combine" ? std::string("at least 2 inputs")
                                                    : std::to_string(want_min) + " input(s)") +
                                 ", got " + std::to_string(in.size()),
                             "node '" + n.id + "'");
    }

    g.topo_order(); // throws on cycles
    return g;
}

// ----------------------------------------------------------- param readers

namespace {

const json& need(const json& p, const char* key, const char* op) {
    auto it = p.find(key);
    if (it == p.end())
        throw ValidationError(std::string(op) + " needs parameter '" + key + "'");
    return *it;
}

std::string need_string(const json& p, const char* key, const char* op) {
    const json& v = need(p, key, op);
    if (!v.is_string() || v.get<std::string>().empty())
        throw ValidationError(std::string(op) + " parameter '" + key +
                              "' must be a non-empty string");
    return v.get<std::string>();
}

double need_number(const json& p, const char* key, const char* op) {
    const json& v = need(p, key, op);
    if (!v.is_number())
        throw ValidationError(std::string(op) + " parameter '" + key + "' must be a number");
    return v.get<double>();
}

std::size_t need_count(const json& p, const char* key, const char* op) {
    const json& v = need(p, key, op);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ValidationError(std::string(op) + " parameter '" + key +
                              "' must be a non-negative integer");
    return static_cast<std::size_t>(v.get<long long>());
}

std::vector<std::string> need_string_list(const json& p, const char* key, const char* op) {
    const json& v = need(p, key, op);
    if (!v.is_array() || v.empty())
        throw ValidationError(std::string(op) + " parameter '" + key +
                              "' must be a non-empty array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string())
            throw ValidationError(std::string(op) + " parameter '" + key +
                                  "' must contain only strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

std::vector<double> need_number_list(const json& p, const char* key, const char* op) {
    const json& v = need(p, key, op);
    if (!v.is_array() || v.empty())
        throw ValidationError(std::string(op) + " parameter '" + key +
                              "' must be a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number())
            throw ValidationError(std::string(op) + " parameter '" + key +
                                  "' must contain only numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

void allow_keys(const json& p, const char* op, const std::set<std::string>& keys) {
    for (auto it = p.begin(); it != p.end(); ++it)
        if (!keys.count(it.key()))
            throw ValidationError(std::string(op) + " has unknown parameter '" + it.key() + "'");
}

tactics::BinSpec read_bins(const json& p) {
    const json& b = need(p, "bins", "classify");
    if (!b.is_object()) throw ValidationError("classify parameter 'bins' must be an object");
    allow_keys(b, "classify bins", {"edges", "equal_width", "equal_frequency", "range"});
    int modes = b.contains("edges") + b.contains("equal_width") + b.contains("equal_frequency");
    if (modes != 1)
        throw ValidationError(
            "classify bins need exactly one of 'edges', 'equal_width', 'equal_frequency'");
    if (b.contains("edges")) return tactics::BinSpec::from_edges(need_number_list(b, "edges", "classify"));
    if (b.contains("equal_frequency")) {
        if (b.contains("range"))
            throw ValidationError("classify equal_frequency takes no 'range'");
        return tactics::BinSpec::equal_frequency(
            static_cast<int>(need_count(b, "equal_frequency", "classify")));
    }
    std::optional<std::pair<double, double>> range;
    if (b.contains("range")) {
        auto r = need_number_list(b, "range", "classify");
        if (r.size() != 2) throw ValidationError("classify range must be [lo, hi]");
        range = std::make_pair(r[0], r[1]);
    }
    return tactics::BinSpec::equal_width(static_cast<int>(need_count(b, "equal_width", "classify")),
                                         range);
}

tactics::BandSpec read_band(const json& p) {
    tactics::BandSpec s;
    std::string mode = need_string(p, "mode", "band");
    if (mode == "quantiles") s.mode = tactics::BandSpec::Mode::Quantiles;
    else if (mode == "cuts") s.mode = tactics::BandSpec::Mode::Cuts;
    else if (mode == "mass") s.mode = tactics::BandSpec::Mode::MassLevels;
    else throw ValidationError("band mode must be 'quantiles', 'cuts' or 'mass'");
    if (s.mode == tactics::BandSpec::Mode::MassLevels) {
        allow_keys(p, "band", {"mode", "levels"});
    } else {
        allow_keys(p, "band", {"mode", "levels", "column"});
        s.column = need_string(p, "column", "band");
    }
    s.levels = need_number_list(p, "levels", "band");
    return s;
}

tactics::NoiseModel read_noise(const json& p) {
    allow_keys(p, "noise", {"family", "scale", "columns"});
    tactics::NoiseModel m;
    std::string family = need_string(p, "family", "noise");
    if (family == "gaussian") m.family = tactics::NoiseModel::Family::Gaussian;
    else if (family == "laplace") m.family = tactics::NoiseModel::Family::Laplace;
    else throw ValidationError("noise family must be 'gaussian' or 'laplace'");
    m.param = need_number(p, "scale", "noise");
    if (m.param < 0.0) throw ValidationError("noise scale must be non-negative");
    m.columns = need_string_list(p, "columns", "noise");
    return m;
}

tactics::KdeSpec read_kde(const json& p) {
    allow_keys(p, "smooth_kde", {"columns", "bandwidth", "grid", "range"});
    tactics::KdeSpec s;
    s.columns = need_string_list(p, "columns", "smooth_kde");
    const json& bw = need(p, "bandwidth", "smooth_kde");
    if (bw.is_string()) {
        if (bw.get<std::string>() != "auto")
            throw ValidationError("smooth_kde bandwidth must be 'auto' or an array of numbers");
    } else {
        s.bandwidth = need_number_list(p, "bandwidth", "smooth_kde");
    }
    for (double g : need_number_list(p, "grid", "smooth_kde")) {
        if (g != static_cast<int>(g))
            throw ValidationError("smooth_kde grid entries must be integers");
        s.grid_n.push_back(static_cast<int>(g));
    }
    if (p.contains("range")) {
        const json& r = p["range"];
        if (!r.is_array())
            throw ValidationError("smooth_kde range must be an array of [lo, hi] or null");
        for (const auto& e : r) {
            if (e.is_null()) {
                s.range.push_back(std::nullopt);
            } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
                s.range.push_back(std::make_pair(e[0].get<double>(), e[1].get<double>()));
            } else {
                throw ValidationError("smooth_kde range entries must be [lo, hi] or null");
            }
        }
    }
    return s;
}

tactics::AdjustmentSpec read_adjustment(const json& p) {
    allow_keys(p, "magnitude_adjust", {"pivot", "u_max", "value_column", "uncertainty_column"});
    tactics::AdjustmentSpec s;
    s.pivot = need_number(p, "pivot", "magnitude_adjust");
    s.u_max = need_number(p, "u_max", "magnitude_adjust");
    if (!(s.u_max > 0.0)) throw ValidationError("magnitude_adjust needs u_max > 0");
    s.value_column = need_string(p, "value_column", "magnitude_adjust");
    s.uncertainty_column = need_string(p, "uncertainty_column", "magnitude_adjust");
    return s;
}

CombineSpec read_combine(const json& p) {
    allow_keys(p, "combine", {"mode", "keys"});
    CombineSpec s;
    std::string mode = need_string(p, "mode", "combine");
    if (mode == "join") {
        s.mode = CombineSpec::Mode::JoinOnKeys;
        s.keys = need_string_list(p, "keys", "combine");
    } else if (mode == "concat") {
        s.mode = CombineSpec::Mode::ConcatRows;
        if (p.contains("keys")) throw ValidationError("combine concat takes no 'keys'");
    } else if (mode == "layer") {
        s.mode = CombineSpec::Mode::Layer;
        if (p.contains("keys")) throw ValidationError("combine layer takes no 'keys'");
    } else {
        throw ValidationError("combine mode must be 'join', 'concat' or 'layer'");
    }
    return s;
}

// Shape-checks a node's parameters without data. Throws ValidationError.
void static_check_params(const PipelineNode& n) {
    const json& p = n.params;
    if (n.op == "source") {
        allow_keys(p, "source", {"table", "rows", "columns"});
        need_string(p, "table", "source");
        if (p.contains("rows")) need_count(p, "rows", "source");
        if (p.contains("columns")) need_string_list(p, "columns", "source");
    } else if (n.op == "classify") {
        allow_keys(p, "classify", {"column", "bins"});
        need_string(p, "column", "classify");
        read_bins(p);
    } else if (n.op == "categorize") {
        allow_keys(p, "categorize", {"column", "mapping", "default"});
        need_string(p, "column", "categorize");
        const json& m = need(p, "mapping", "categorize");
        if (!m.is_object()) throw ValidationError("categorize mapping must be an object");
        for (auto it = m.begin(); it != m.end(); ++it)
            if (!it.value().is_string())
                throw ValidationError("categorize mapping values must be strings");
        if (p.contains("default")) need_string(p, "default", "categorize");
    } else if (n.op == "aggregate") {
        allow_keys(p, "aggregate", {"group_by", "stats"});
        need_string_list(p, "group_by", "aggregate");
        for (const auto& s : need_string_list(p, "stats", "aggregate"))
            tactics::StatSpec::parse(s);
    } else if (n.op == "band") {
        read_band(p);
    } else if (n.op == "derive") {
        allow_keys(p, "derive", {"expression", "column"});
        Expr::parse(need_string(p, "expression", "derive"));
        need_string(p, "column", "derive");
    } else if (n.op == "encode_select") {
        allow_keys(p, "encode_select", {"columns"});
        need_string_list(p, "columns", "encode_select");
    } else if (n.op == "subsample") {
        allow_keys(p, "subsample", {"n", "replacement"});
        need_count(p, "n", "subsample");
        if (p.contains("replacement") && !p["replacement"].is_boolean())
            throw ValidationError("subsample 'replacement' must be a boolean");
    } else if (n.op == "noise") {
        read_noise(p);
    } else if (n.op == "permute") {
        allow_keys(p, "permute", {"column"});
        need_string(p, "column", "permute");
    } else if (n.op == "smooth_kde") {
        read_kde(p);
    } else if (n.op == "magnitude_adjust") {
        read_adjustment(p);
    } else if (n.op == "predict_ols") {
        allow_keys(p, "predict_ols", {"y", "xs"});
        need_string(p, "y", "predict_ols");
        need_string_list(p, "xs", "predict_ols");
    } else if (n.op == "project_pca") {
        allow_keys(p, "project_pca", {"columns", "k"});
        need_string_list(p, "columns", "project_pca");
        need_count(p, "k", "project_pca");
    } else if (n.op == "full_disclosure") {
        allow_keys(p, "full_disclosure", {});
    } else if (n.op == "combine") {
        read_combine(p);
    }
}

} // namespace

// ----------------------------------------------------------- kind checking

const char* static_kind_name(StaticKind k) {
    switch (k) {
    case StaticKind::Sample: return "Sample";
    case StaticKind::Summary: return "Summary";
    case StaticKind::Model: return "Model";
    case StaticKind::Bundle: return "Bundle";
    }
    return "?";
}

namespace {

[[noreturn]] void kind_mismatch(const PipelineNode& n, const char* expected, StaticKind got) {
    throw ValidationError(n.op + " expects " + expected + " input, got " +
                          static_kind_name(got));
}

} // namespace

StaticKind infer_kind(const PipelineNode& n, const std::vector<StaticKind>& in) {
    for (StaticKind k : in)
        if (k == StaticKind::Bundle)
            throw ValidationError("layer bundles are terminal and cannot feed '" + n.op + "'");

    if (n.op == "source") return StaticKind::Sample;
    if (n.op == "combine") {
        CombineSpec spec = read_combine(n.params);
        if (spec.mode == CombineSpec::Mode::Layer) return StaticKind::Bundle;
        for (StaticKind k : in)
            if (k != StaticKind::Sample) kind_mismatch(n, "Sample", k);
        return StaticKind::Sample;
    }

    StaticKind k0 = in.at(0);
    if (n.op == "classify" || n.op == "categorize" || n.op == "derive" ||
        n.op == "subsample" || n.op == "noise" || n.op == "permute" ||
        n.op == "full_disclosure") {
        if (k0 != StaticKind::Sample) kind_mismatch(n, "Sample", k0);
        return StaticKind::Sample;
    }
    if (n.op == "aggregate") {
        if (k0 != StaticKind::Sample) kind_mismatch(n, "Sample", k0);
        return StaticKind::Summary;
    }
    if (n.op == "band") {
        tactics::BandSpec spec = read_band(n.params);
        if (spec.mode == tactics::BandSpec::Mode::MassLevels) {
            if (k0 != StaticKind::Model)
                kind_mismatch(n, "Model (a density grid)", k0);
        } else if (k0 != StaticKind::Sample) {
            kind_mismatch(n, "Sample", k0);
        }
        return StaticKind::Summary;
    }
    if (n.op == "encode_select" || n.op == "magnitude_adjust") {
        if (k0 != StaticKind::Sample && k0 != StaticKind::Summary)
            kind_mismatch(n, "Sample or Summary", k0);
        return k0;
    }
    if (n.op == "smooth_kde" || n.op == "predict_ols" || n.op == "project_pca") {
        if (k0 != StaticKind::Sample) kind_mismatch(n, "Sample", k0);
        return StaticKind::Model;
    }
    throw ValidationError("unknown op '" + n.op + "'");
}

std::vector<TypeError> validate_pipeline(const PipelineGraph& g) {
    std::vector<TypeError> errs;
    std::map<std::string, StaticKind> kinds;
    for (const auto& id : g.topo_order()) {
        const PipelineNode& n = g.node(id);
        try {
            static_check_params(n);
        } catch (const Error& e) {
            errs.push_back({id, e.what()});
            continue;
        }
        std::vector<StaticKind> in;
        bool upstream_ok = true;
        for (const auto* e : g.in_edges(id)) {
            auto it = kinds.find(e->from);
            if (it == kinds.end()) {
                upstream_ok = false; // don't cascade errors
                break;
            }
            in.push_back(it->second);
        }
        if (!upstream_ok) continue;
        try {
            kinds[id] = infer_kind(n, in);
        } catch (const Error& e) {
            errs.push_back({id, e.what()});
        }
    }
    return errs;
}

std::map<std::string, StaticKind> inferred_kinds(const PipelineGraph& g) {
    auto errs = validate_pipeline(g);
    if (!errs.empty())
        throw ValidationError("node '" + errs[0].node_id + "': " + errs[0].message);
    std::map<std::string, StaticKind> kinds;
    for (const auto& id : g.topo_order()) {
        std::vector<StaticKind> in;
        for (const auto* e : g.in_edges(id)) in.push_back(kinds.at(e->from));
        kinds[id] = infer_kind(g.node(id), in);
    }
    return kinds;
}

// ----------------------------------------------------------------- combine

namespace {

bool cell_equal(const Cell& a, const Cell& b) {
    if (a.index() != b.index()) return false;
    if (is_missing(a)) return false; // missing keys never match
    if (is_number(a)) return as_number(a) == as_number(b);
    return as_text(a) == as_text(b);
}

Table join_two(const Table& a, const Table& b, const std::vector<std::string>& keys) {
    std::vector<std::size_t> ka, kb;
    for (const auto& k : keys) {
        ka.push_back(a.column_index(k));
        kb.push_back(b.column_index(k));
    }
    std::set<std::string> key_set(keys.begin(), keys.end());
    Table out;
    out.source_id = a.source_id.empty() || a.source_id == b.source_id
                        ? b.source_id
                        : a.source_id + "+" + b.source_id;
    out.columns = a.columns;
    std::vector<std::size_t> b_carry;
    for (std::size_t i = 0; i < b.columns.size(); ++i) {
        if (key_set.count(b.columns[i].name)) continue;
        if (a.find_column(b.columns[i].name))
            throw ValidationError("join would duplicate column '" + b.columns[i].name + "'");
        b_carry.push_back(i);
        out.columns.push_back(b.columns[i]);
    }
    for (const auto& ra : a.rows) {
        for (const auto& rb : b.rows) {
            bool match = true;
            for (std::size_t i = 0; i < ka.size() && match; ++i)
                match = cell_equal(ra[ka[i]], rb[kb[i]]);
            if (!match) continue;
            auto row = ra;
            for (std::size_t i : b_carry) row.push_back(rb[i]);
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

Table concat_two(const Table& a, const Table& b) {
    if (a.columns.size() != b.columns.size())
        throw ValidationError("concat schema mismatch: " + std::to_string(a.columns.size()) +
                              " vs " + std::to_string(b.columns.size()) + " columns");
    for (std::size_t i = 0; i < a.columns.size(); ++i) {
        if (a.columns[i].name != b.columns[i].name)
            throw ValidationError("concat schema mismatch at column " + std::to_string(i) +
                                  ": '" + a.columns[i].name + "' vs '" + b.columns[i].name + "'");
        if (a.columns[i].kind != b.columns[i].kind)
            throw ValidationError("concat schema mismatch: column '" + a.columns[i].name +
                                  "' has different kinds");
    }
    Table out = a;
    if (!b.source_id.empty() && b.source_id != a.source_id)
        out.source_id = a.source_id + "+" + b.source_id;
    for (const auto& r : b.rows) out.rows.push_back(r);
    return out;
}

} // namespace

NodeOutput combine(const std::vector<Representation>& reps, const CombineSpec& spec,
                   const std::string& node_id) {
    if (reps.size() < 2) throw ValidationError("combine takes at least 2 inputs");

    if (spec.mode == CombineSpec::Mode::Layer) return LayerBundle{reps};

    for (const auto& r : reps)
        if (r.kind() != RepKind::Sample)
            throw ValidationError("combine " +
                                  std::string(spec.mode == CombineSpec::Mode::JoinOnKeys
                                                  ? "join"
                                                  : "concat") +
                                  " expects Sample inputs");

    Table acc = reps[0].sample();
    for (std::size_t i = 1; i < reps.size(); ++i)
        acc = spec.mode == CombineSpec::Mode::JoinOnKeys
                  ? join_two(acc, reps[i].sample(), spec.keys)
                  : concat_two(acc, reps[i].sample());

    // Combined lineage: every input's history in input order, then this op.
    Representation out;
    out.payload = std::move(acc);
    for (const auto& r : reps)
        out.lineage.insert(out.lineage.end(), r.lineage.begin(), r.lineage.end());
    LineageEntry e;
    e.op = "combine";
    e.node_id = node_id;
    e.notes = {{"mode", spec.mode == CombineSpec::Mode::JoinOnKeys ? "join" : "concat"}};
    if (!spec.keys.empty()) {
        std::string ks;
        for (std::size_t i = 0; i < spec.keys.size(); ++i)
            ks += (i ? "," : "") + spec.keys[i];
        e.notes.emplace_back("keys", ks);
    }
    out.lineage.push_back(std::move(e));
    return out;
}

// ---------------------------------------------------------------- execute

namespace {

NodeOutput run_node(const PipelineNode& n, const std::vector<Representation>& in,
                    const std::map<std::string, Table>& inputs, Seed seed) {
    const json& p = n.params;
    if (n.op == "source") {
        auto it = inputs.find(n.id);
        if (it == inputs.end()) throw ValidationError("source '" + n.id + "' is unbound");
        Table t = it->second;
        t.check_invariants();
        if (t.source_id.empty()) t.source_id = n.id;
        return tactics::full_disclosure(t);
    }
    if (n.op == "full_disclosure") return in.at(0);
    if (n.op == "classify")
        return tactics::classify(in.at(0), p["column"].get<std::string>(), read_bins(p), n.id);
    if (n.op == "categorize") {
        std::map<std::string, std::string> mapping;
        for (auto it = p["mapping"].begin(); it != p["mapping"].end(); ++it)
            mapping[it.key()] = it.value().get<std::string>();
        std::optional<std::string> fallback;
        if (p.contains("default")) fallback = p["default"].get<std::string>();
        return tactics::categorize(in.at(0), p["column"].get<std::string>(), mapping, fallback,
                                   n.id);
    }
    if (n.op == "aggregate") {
        std::vector<tactics::StatSpec> stats;
        for (const auto& s : p["stats"]) stats.push_back(tactics::StatSpec::parse(s.get<std::string>()));
        return tactics::aggregate(in.at(0), p["group_by"].get<std::vector<std::string>>(), stats,
                                  n.id);
    }
    if (n.op == "band") return tactics::band(in.at(0), read_band(p), n.id);
    if (n.op == "derive")
        return tactics::derive(in.at(0), p["expression"].get<std::string>(),
                               p["column"].get<std::string>(), n.id);
    if (n.op == "encode_select")
        return tactics::encode_select(in.at(0), p["columns"].get<std::vector<std::string>>(),
                                      n.id);
    if (n.op == "subsample") {
        bool repl = p.contains("replacement") && p["replacement"].get<bool>();
        return tactics::subsample(in.at(0), p["n"].get<std::size_t>(), repl,
                                  derive_subseed(seed, n.id), n.id);
    }
    if (n.op == "noise")
        return tactics::noise(in.at(0), read_noise(p), derive_subseed(seed, n.id), n.id);
    if (n.op == "permute")
        return tactics::permute(in.at(0), p["column"].get<std::string>(),
                                derive_subseed(seed, n.id), n.id);
    if (n.op == "smooth_kde") return tactics::smooth_kde(in.at(0), read_kde(p), n.id);
    if (n.op == "magnitude_adjust")
        return tactics::magnitude_adjust(in.at(0), read_adjustment(p), n.id);
    if (n.op == "predict_ols")
        return tactics::predict_ols(in.at(0), p["y"].get<std::string>(),
                                    p["xs"].get<std::vector<std::string>>(), n.id);
    if (n.op == "project_pca")
        return tactics::project_pca(in.at(0), p["columns"].get<std::vector<std::string>>(),
                                    p["k"].get<std::size_t>(), n.id);
    if (n.op == "combine") return combine(in, read_combine(p), n.id);
    throw ValidationError("unknown op '" + n.op + "'");
}

} // namespace

std::map<std::string, NodeOutput> execute(const PipelineGraph& g,
                                          const std::map<std::string, Table>& inputs,
                                          Seed seed) {
    auto errs = validate_pipeline(g);
    if (!errs.empty()) {
        std::string msg;
        for (const auto& e : errs)
            msg += (msg.empty() ? "" : "; ") + ("node '" + e.node_id + "': " + e.message);
        throw ValidationError(msg);
    }

    std::map<std::string, NodeOutput> results;
    for (const auto& id : g.topo_order()) {
        const PipelineNode& n = g.node(id);
        std::vector<Representation> in;
        for (const auto* e : g.in_edges(id)) {
            const NodeOutput& up = results.at(e->from);
            if (std::holds_alternative<LayerBundle>(up))
                throw ValidationError("node '" + id + "': layer bundles are terminal");
            in.push_back(std::get<Representation>(up));
        }
        try {
            results[id] = run_node(n, in, inputs, seed);
        } catch (const ParseError& e) {
            throw ParseError("node '" + id + "': " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError("node '" + id + "': " + e.what());
        } catch (const OpError& e) {
            throw OpError("node '" + id + "': " + e.what());
        }
        if (std::holds_alternative<Representation>(results[id]))
            check_representation(std::get<Representation>(results[id]));
    }

    std::map<std::string, NodeOutput> out;
    for (const auto& id : g.outputs) out.emplace(id, results.at(id));
    return out;
}

} // namespace aperture
