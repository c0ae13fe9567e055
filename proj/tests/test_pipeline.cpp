#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "aperture/error.hpp"
#include "aperture/pipeline.hpp"
#include "aperture/tactics.hpp"

using namespace aperture;

namespace {

Table values_table(const std::vector<double>& values) {
    Table t;
    t.columns = {Column{"v", ColumnKind::Continuous, {}, {}}};
    for (double v : values) t.rows.push_back({Cell{v}});
    return t;
}

const Representation& rep_of(const std::map<std::string, NodeOutput>& out,
                             const std::string& id) {
    return std::get<Representation>(out.at(id));
}

} // namespace

// ------------------------------------------------------------------- parse

TEST_CASE("parse_pipeline reads a linear chain") {
    auto g = parse_pipeline(R"({
        "nodes": [
            {"id": "src", "op": "source", "params": {"table": "points"}},
            {"id": "bin", "op": "classify",
             "params": {"column": "v", "bins": {"equal_width": 2, "range": [0, 3]}}},
            {"id": "agg", "op": "aggregate",
             "params": {"group_by": ["v__bin"], "stats": ["count"]}}
        ],
        "edges": [["src", "bin", 0], ["bin", "agg", 0]],
        "outputs": ["agg"]
    })");
    CHECK(g.nodes.size() == 3);
    CHECK(g.edges.size() == 2);
    CHECK(g.outputs == std::vector<std::string>{"agg"});
    CHECK(g.source_ids() == std::vector<std::string>{"src"});
    CHECK(g.topo_order() == std::vector<std::string>{"src", "bin", "agg"});
    CHECK(g.node("bin").op == "classify");
    CHECK(g.find("nope") == nullptr);
    CHECK_THROWS_AS(g.node("nope"), ValidationError);
    auto in = g.in_edges("agg");
    REQUIRE(in.size() == 1);
    CHECK(in[0]->from == "bin");
}

TEST_CASE("parse_pipeline accepts descriptions and signal declarations") {
    auto g = parse_pipeline(R"({
        "description": "a fan-out",
        "nodes": [
            {"id": "src", "op": "source", "params": {"table": "t"}, "description": "rows"},
            {"id": "left", "op": "permute", "params": {"column": "v"}},
            {"id": "right", "op": "derive", "params": {"expression": "v + 1", "column": "w"}}
        ],
        "edges": [["src", "left", 0], ["src", "right", 0]],
        "outputs": ["left", "right"],
        "signals": [{"id": "s1", "kind": "quantile", "column": "v", "p": 0.5}]
    })");
    CHECK(g.outputs.size() == 2);
    CHECK(g.signals.size() == 1);
    CHECK(g.signals[0]["kind"] == "quantile");
}

TEST_CASE("parse_pipeline rejects malformed documents") {
    auto msg = [](const std::string& text) {
        return thrown_message<ParseError>([&] { parse_pipeline(text); });
    };
    CHECK(contains(msg("["), "JSON") || contains(msg("["), "parse"));
    CHECK(contains(msg("[]"), "object"));
    CHECK(contains(msg(R"({"outputs": []})"), "nodes"));
    CHECK(contains(msg(R"({"nodes": []})"), "outputs"));
    CHECK(contains(msg(R"({"nodes": [], "outputs": [], "extra": 1})"), "extra"));
    CHECK(contains(msg(R"({"nodes": [{"op": "source"}], "outputs": []})"), "id"));
    CHECK(contains(msg(R"({"nodes": [{"id": "a"}], "outputs": []})"), "op"));
    CHECK(contains(
        msg(R"({"nodes": [{"id": "a", "op": "shred"}], "outputs": ["a"]})"), "shred"));
    CHECK(contains(msg(R"({
        "nodes": [{"id": "a", "op": "source", "params": {"table": "t"}},
                  {"id": "a", "op": "source", "params": {"table": "t"}}],
        "outputs": ["a"]})"),
                   "duplicate node id"));
    CHECK(contains(msg(R"({
        "nodes": [{"id": "a", "op": "source", "params": {"table": "t"}},
                  {"id": "b", "op": "permute", "params": {"column": "v"}, "weird": 1}],
        "edges": [["a", "b", 0]], "outputs": ["b"]})"),
                   "weird"));
    CHECK(contains(msg(R"({
        "nodes": [{"id": "a", "op": "source", "params": 3}], "outputs": ["a"]})"),
                   "params"));
}

TEST_CASE("parse_pipeline rejects malformed edges and outputs") {
    auto msg = [](const std::string& text) {
        return thrown_message<ParseError>([&] { parse_pipeline(text); });
    };
    const char* two_nodes = R"("nodes": [
        {"id": "a", "op": "source", "params": {"table": "t"}},
        {"id": "b", "op": "permute", "params": {"column": "v"}}],)";
    CHECK(contains(msg("{" + std::string(two_nodes) +
                       R"("edges": [["a", "b"]], "outputs": ["b"]})"),
                   "[from, to, slot]"));
    CHECK(contains(msg("{" + std::string(two_nodes) +
                       R"("edges": [["a", "b", 0.5]], "outputs": ["b"]})"),
                   "[from, to, slot]"));
    CHECK(contains(msg("{" + std::string(two_nodes) +
                       R"("edges": [["a", "b", -1]], "outputs": ["b"]})"),
                   "non-negative"));
    CHECK(contains(msg("{" + std::string(two_nodes) +
                       R"("edges": [["ghost", "b", 0]], "outputs": ["b"]})"),
                   "ghost"));
    CHECK(contains(msg("{" + std::string(two_nodes) +
                       R"("edges": [["a", "b", 0]], "outputs": ["ghost"]})"),
                   "ghost"));
    CHECK(contains(msg("{" + std::string(two_nodes) +
                       R"("edges": [["a", "b", 0]], "outputs": ["b", "b"]})"),
                   "duplicate output"));
    CHECK(contains(msg("{" + std::string(two_nodes) +
                       R"("edges": [["a", "b", 0]], "outputs": []})"),
                   "at least one output"));
}

TEST_CASE("parse_pipeline enforces arity and slot contiguity") {
    auto msg = [](const std::string& text) {
        return thrown_message<ParseError>([&] { parse_pipeline(text); });
    };
    // A tactic node with no input.
    CHECK(contains(msg(R"({
        "nodes": [{"id": "p", "op": "permute", "params": {"column": "v"}}],
        "outputs": ["p"]})"),
                   "1 input(s), got 0"));
    // A source with an input.
    CHECK(contains(msg(R"({
        "nodes": [{"id": "a", "op": "source", "params": {"table": "t"}},
                  {"id": "b", "op": "source", "params": {"table": "t"}}],
        "edges": [["a", "b", 0]], "outputs": ["b"]})"),
                   "0 input(s), got 1"));
    // Combine wants two or more inputs.
    CHECK(contains(msg(R"({
        "nodes": [{"id": "a", "op": "source", "params": {"table": "t"}},
                  {"id": "c", "op": "combine", "params": {"mode": "concat"}}],
        "edges": [["a", "c", 0]], "outputs": ["c"]})"),
                   "at least 2"));
    // Slot gap on a combine: 0 and 2.
    CHECK(contains(msg(R"({
        "nodes": [{"id": "a", "op": "source", "params": {"table": "t"}},
                  {"id": "b", "op": "source", "params": {"table": "u"}},
                  {"id": "c", "op": "combine", "params": {"mode": "concat"}}],
        "edges": [["a", "c", 0], ["b", "c", 2]], "outputs": ["c"]})"),
                   "slots"));
}

TEST_CASE("parse_pipeline names the nodes stuck on a cycle") {
    auto m = thrown_message<ParseError>([] {
        parse_pipeline(R"({
            "nodes": [{"id": "a", "op": "permute", "params": {"column": "v"}},
                      {"id": "b", "op": "permute", "params": {"column": "v"}}],
            "edges": [["a", "b", 0], ["b", "a", 0]],
            "outputs": ["b"]})");
    });
    CHECK(contains(m, "cycle"));
    CHECK(contains(m, "a"));
    CHECK(contains(m, "b"));
}

TEST_CASE("topological order follows declaration order among ready nodes") {
    auto g = parse_pipeline(R"({
        "nodes": [
            {"id": "src", "op": "source", "params": {"table": "t"}},
            {"id": "late", "op": "permute", "params": {"column": "v"}},
            {"id": "early", "op": "permute", "params": {"column": "v"}}
        ],
        "edges": [["src", "late", 0], ["src", "early", 0]],
        "outputs": ["late", "early"]
    })");
    CHECK(g.topo_order() == std::vector<std::string>{"src", "late", "early"});
}

// ----------------------------------------------------------- kind checking

namespace {

PipelineNode make_node(const std::string& op, const std::string& params_json) {
    PipelineNode n;
    n.id = "n";
    n.op = op;
    n.params = nlohmann::json::parse(params_json);
    return n;
}

} // namespace

TEST_CASE("infer_kind maps each op onto its output kind") {
    using K = StaticKind;
    CHECK(infer_kind(make_node("source", R"({"table": "t"})"), {}) == K::Sample);
    CHECK(infer_kind(make_node("classify", "{}"), {K::Sample}) == K::Sample);
    CHECK(infer_kind(make_node("aggregate", "{}"), {K::Sample}) == K::Summary);
    CHECK(infer_kind(make_node("smooth_kde", "{}"), {K::Sample}) == K::Model);
    CHECK(infer_kind(make_node("predict_ols", "{}"), {K::Sample}) == K::Model);
    CHECK(infer_kind(make_node("project_pca", "{}"), {K::Sample}) == K::Model);
    CHECK(infer_kind(make_node("band", R"({"mode": "quantiles", "column": "v",
                                           "levels": [0, 1]})"),
                     {K::Sample}) == K::Summary);
    CHECK(infer_kind(make_node("band", R"({"mode": "mass", "levels": [0.85]})"),
                     {K::Model}) == K::Summary);
    // Pass-through kinds.
    CHECK(infer_kind(make_node("encode_select", "{}"), {K::Summary}) == K::Summary);
    CHECK(infer_kind(make_node("magnitude_adjust", "{}"), {K::Sample}) == K::Sample);
    CHECK(infer_kind(make_node("combine", R"({"mode": "layer"})"),
                     {K::Sample, K::Model}) == K::Bundle);
    CHECK(infer_kind(make_node("combine", R"({"mode": "concat"})"),
                     {K::Sample, K::Sample}) == K::Sample);
}

TEST_CASE("infer_kind rejects inadmissible input kinds") {
    using K = StaticKind;
    CHECK_THROWS_AS(infer_kind(make_node("aggregate", "{}"), {K::Model}), ValidationError);
    CHECK_THROWS_AS(infer_kind(make_node("classify", "{}"), {K::Summary}), ValidationError);
    CHECK_THROWS_AS(infer_kind(make_node("smooth_kde", "{}"), {K::Summary}), ValidationError);
    CHECK_THROWS_AS(infer_kind(make_node("band", R"({"mode": "mass", "levels": [0.5]})"),
                               {K::Sample}),
                    ValidationError);
    CHECK_THROWS_AS(infer_kind(make_node("band",
                                         R"({"mode": "quantiles", "column": "v",
                                             "levels": [0, 1]})"),
                               {K::Model}),
                    ValidationError);
    CHECK_THROWS_AS(infer_kind(make_node("encode_select", "{}"), {K::Model}), ValidationError);
    // Bundles never feed anything.
    CHECK_THROWS_AS(infer_kind(make_node("permute", "{}"), {K::Bundle}), ValidationError);
    CHECK_THROWS_AS(infer_kind(make_node("combine", R"({"mode": "layer"})"),
                               {K::Bundle, K::Sample}),
                    ValidationError);
}

TEST_CASE("validate_pipeline reports kind mismatches before execution") {
    auto g = parse_pipeline(R"({
        "nodes": [
            {"id": "src", "op": "source", "params": {"table": "t"}},
            {"id": "kde", "op": "smooth_kde",
             "params": {"columns": ["v"], "bandwidth": "auto", "grid": [16]}},
            {"id": "agg", "op": "aggregate",
             "params": {"group_by": ["v"], "stats": ["count"]}}
        ],
        "edges": [["src", "kde", 0], ["kde", "agg", 0]],
        "outputs": ["agg"]
    })");
    auto errs = validate_pipeline(g);
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].node_id == "agg");
    CHECK(contains(errs[0].message, "Sample"));
    CHECK(contains(errs[0].message, "Model"));
}

TEST_CASE("validate_pipeline reports static parameter problems per node") {
    auto g = parse_pipeline(R"({
        "nodes": [
            {"id": "src", "op": "source", "params": {"table": "t"}},
            {"id": "bad_bins", "op": "classify", "params": {"column": "v",
                "bins": {"edges": [1], "equal_width": 2}}},
            {"id": "bad_expr", "op": "derive",
             "params": {"expression": "v +", "column": "w"}}
        ],
        "edges": [["src", "bad_bins", 0], ["src", "bad_expr", 0]],
        "outputs": ["bad_bins", "bad_expr"]
    })");
    auto errs = validate_pipeline(g);
    REQUIRE(errs.size() == 2);
    CHECK(errs[0].node_id == "bad_bins");
    CHECK(contains(errs[0].message, "exactly one of"));
    CHECK(errs[1].node_id == "bad_expr");
}

TEST_CASE("validate_pipeline does not cascade upstream failures") {
    auto g = parse_pipeline(R"({
        "nodes": [
            {"id": "src", "op": "source", "params": {"table": "t"}},
            {"id": "broken", "op": "permute", "params": {}},
            {"id": "down", "op": "permute", "params": {"column": "v"}}
        ],
        "edges": [["src", "broken", 0], ["broken", "down", 0]],
        "outputs": ["down"]
    })");
    auto errs = validate_pipeline(g);
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].node_id == "broken");
}

TEST_CASE("inferred_kinds returns the full node map or throws on invalid graphs") {
    auto g = parse_pipeline(R"({
        "nodes": [
            {"id": "src", "op": "source", "params": {"table": "t"}},
            {"id": "kde", "op": "smooth_kde",
             "params": {"columns": ["v"], "bandwidth": "auto", "grid": [16]}},
            {"id": "hdr", "op": "band", "params": {"mode": "mass", "levels": [0.85]}},
            {"id": "rows", "op": "subsample", "params": {"n": 2}},
            {"id": "both", "op": "combine", "params": {"mode": "layer"}}
        ],
        "edges": [["src", "kde", 0], ["kde", "hdr", 0], ["src", "rows", 0],
                  ["hdr", "both", 0], ["rows", "both", 1]],
        "outputs": ["both"]
    })");
    auto kinds = inferred_kinds(g);
    CHECK(kinds.at("src") == StaticKind::Sample);
    CHECK(kinds.at("kde") == StaticKind::Model);
    CHECK(kinds.at("hdr") == StaticKind::Summary);
    CHECK(kinds.at("rows") == StaticKind::Sample);
    CHECK(kinds.at("both") == StaticKind::Bundle);

    auto bad = parse_pipeline(R"({
        "nodes": [
            {"id": "src", "op": "source", "params": {"table": "t"}},
            {"id": "agg", "op": "aggregate",
             "params": {"group_by": ["v"], "stats": ["count"]}},
            {"id": "again", "op": "aggregate",
             "params": {"group_by": ["v"], "stats": ["count"]}}
        ],
        "edges": [["src", "agg", 0], ["agg", "again", 0]],
        "outputs": ["again"]
    })");
    auto m = thrown_message<ValidationError>([&] { inferred_kinds(bad); });
    CHECK(contains(m, "again"));
}

TEST_CASE("bundles are terminal in static checking") {
    auto g = parse_pipeline(R"({
        "nodes": [
            {"id": "a", "op": "source", "params": {"table": "t"}},
            {"id": "b", "op": "source", "params": {"table": "u"}},
            {"id": "both", "op": "combine", "params": {"mode": "layer"}},
            {"id": "after", "op": "permute", "params": {"column": "v"}}
        ],
        "edges": [["a", "both", 0], ["b", "both", 1], ["both", "after", 0]],
        "outputs": ["after"]
    })");
    auto errs = validate_pipeline(g);
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].node_id == "after");
    CHECK(contains(errs[0].message, "terminal"));
}

// ----------------------------------------------------------------- combine

TEST_CASE("combine concat stacks rows after checking schemas") {
    auto a = tactics::full_disclosure(values_table({1, 2}));
    auto b = tactics::full_disclosure(values_table({3}));
    auto out = combine({a, b}, CombineSpec{CombineSpec::Mode::ConcatRows, {}});
    const auto& rep = std::get<Representation>(out);
    CHECK(rep.sample().numeric_values(0) == std::vector<double>{1, 2, 3});
    CHECK(rep.lineage.back().op == "combine");

    auto empty = tactics::full_disclosure(values_table({}));
    auto same = combine({a, empty}, CombineSpec{CombineSpec::Mode::ConcatRows, {}});
    CHECK(std::get<Representation>(same).sample().rows == a.sample().rows);

    Table renamed = values_table({9});
    renamed.columns[0].name = "w";
    auto m = thrown_message<ValidationError>([&] {
        combine({a, tactics::full_disclosure(renamed)},
                CombineSpec{CombineSpec::Mode::ConcatRows, {}});
    });
    CHECK(contains(m, "schema mismatch"));
}

TEST_CASE("combine join matches key columns and carries the rest") {
    Table left;
    left.columns = {Column{"k", ColumnKind::Nominal, {}, {}},
                    Column{"x", ColumnKind::Continuous, {}, {}}};
    left.rows = {{Cell{std::string{"a"}}, Cell{1.0}}, {Cell{std::string{"b"}}, Cell{2.0}}};
    Table right;
    right.columns = {Column{"k", ColumnKind::Nominal, {}, {}},
                     Column{"y", ColumnKind::Continuous, {}, {}}};
    right.rows = {{Cell{std::string{"b"}}, Cell{20.0}}, {Cell{std::string{"c"}}, Cell{30.0}}};

    auto out = combine({tactics::full_disclosure(left), tactics::full_disclosure(right)},
                       CombineSpec{CombineSpec::Mode::JoinOnKeys, {"k"}});
    const Table& t = std::get<Representation>(out).sample();
    REQUIRE(t.row_count() == 1); // only "b" appears on both sides
    CHECK(as_text(t.rows[0][0]) == "b");
    CHECK(as_number(t.rows[0][t.column_index("x")]) == 2.0);
    CHECK(as_number(t.rows[0][t.column_index("y")]) == 20.0);

    // Disjoint keys join to an empty table with the merged schema.
    Table lonely = right;
    lonely.rows = {{Cell{std::string{"z"}}, Cell{0.0}}};
    auto none = combine({tactics::full_disclosure(left), tactics::full_disclosure(lonely)},
                        CombineSpec{CombineSpec::Mode::JoinOnKeys, {"k"}});
    CHECK(std::get<Representation>(none).sample().row_count() == 0);
    CHECK(std::get<Representation>(none).sample().column_count() == 3);

    // A non-key column present on both sides would collide.
    auto m = thrown_message<ValidationError>([&] {
        combine({tactics::full_disclosure(left), tactics::full_disclosure(left)},
                CombineSpec{CombineSpec::Mode::JoinOnKeys, {"k"}});
    });
    CHECK(contains(m, "duplicate column"));
}

TEST_CASE("combine layer keeps members whole") {
    auto a = tactics::full_disclosure(values_table({1, 2}));
    auto b = tactics::aggregate(a, {}, {tactics::StatSpec::parse("count")});
    auto out = combine({a, b}, CombineSpec{CombineSpec::Mode::Layer, {}});
    const auto& bundle = std::get<LayerBundle>(out);
    REQUIRE(bundle.members.size() == 2);
    CHECK(bundle.members[0].kind() == RepKind::Sample);
    CHECK(bundle.members[1].kind() == RepKind::Summary);
    CHECK(bundle.members[0].lineage.empty());
    CHECK(bundle.members[1].lineage.size() == 1);
}

TEST_CASE("combine requires two representations") {
    auto a = tactics::full_disclosure(values_table({1}));
    CHECK_THROWS_AS(combine({a}, CombineSpec{CombineSpec::Mode::Layer, {}}), ValidationError);
}

// ----------------------------------------------------------------- execute

TEST_CASE("execute binds sources by node id and returns only declared outputs") {
    auto g = parse_pipeline(R"({
        "nodes": [
            {"id": "src", "op": "source", "params": {"table": "points"}},
            {"id": "keep", "op": "encode_select", "params": {"columns": ["v"]}},
            {"id": "agg", "op": "aggregate", "params": {"group_by": ["v"],
                                                        "stats": ["count"]}}
        ],
        "edges": [["src", "keep", 0], ["keep", "agg", 0]],
        "outputs": ["agg"]
    })");
    auto out = execute(g, {{"src", values_table({1, 1, 2})}}, Seed{0});
    CHECK(out.size() == 1);
    CHECK(out.count("agg") == 1);
    CHECK(rep_of(out, "agg").summary().groups.size() == 2);
}

TEST_CASE("execute runs classify then aggregate end to end") {
    auto g = parse_pipeline(R"({
        "nodes": [
            {"id": "src", "op": "source", "params": {"table": "points"}},
            {"id": "bin", "op": "classify",
             "params": {"column": "v", "bins": {"equal_width": 2, "range": [0, 3]}}},
            {"id": "agg", "op": "aggregate",
             "params": {"group_by": ["v__bin"], "stats": ["count"]}}
        ],
        "edges": [["src", "bin", 0], ["bin", "agg", 0]],
        "outputs": ["agg"]
    })");
    auto out = execute(g, {{"src", values_table({0, 1, 2, 3})}}, Seed{7});
    const SummaryRep& s = rep_of(out, "agg").summary();
    REQUIRE(s.groups.size() == 2);
    // Interval keys recovered from the classified column, two rows apiece.
    CHECK(std::get<Interval>(s.groups[0].keys[0]) == Interval{0.0, 1.5, true, false});
    CHECK(std::get<Interval>(s.groups[1].keys[0]) == Interval{1.5, 3.0, true, true});
    CHECK(as_number(s.groups[0].stats[0]) == 2.0);
    CHECK(as_number(s.groups[1].stats[0]) == 2.0);
    REQUIRE(s.key_axes.size() == 1);
    CHECK(s.key_axes[0].bins.size() == 2); // full bin list rides along
}

TEST_CASE("execute keeps per-node draws independent and reruns identical") {
    const char* with_extra = R"({
        "nodes": [
            {"id": "src", "op": "source", "params": {"table": "t"}},
            {"id": "jitter", "op": "noise",
             "params": {"family": "gaussian", "scale": 1, "columns": ["v"]}},
            {"id": "other", "op": "permute", "params": {"column": "v"}}
        ],
        "edges": [["src", "jitter", 0], ["src", "other", 0]],
        "outputs": ["jitter", "other"]
    })";
    const char* without_extra = R"({
        "nodes": [
            {"id": "src", "op": "source", "params": {"table": "t"}},
            {"id": "jitter", "op": "noise",
             "params": {"family": "gaussian", "scale": 1, "columns": ["v"]}}
        ],
        "edges": [["src", "jitter", 0]],
        "outputs": ["jitter"]
    })";
    Table t = values_table({10, 20, 30});
    auto a = execute(parse_pipeline(with_extra), {{"src", t}}, Seed{42});
    auto b = execute(parse_pipeline(with_extra), {{"src", t}}, Seed{42});
    auto c = execute(parse_pipeline(without_extra), {{"src", t}}, Seed{42});
    // Rerun is bit-identical; removing an unrelated node changes nothing.
    CHECK(rep_of(a, "jitter").sample().rows == rep_of(b, "jitter").sample().rows);
    CHECK(rep_of(a, "jitter").sample().rows == rep_of(c, "jitter").sample().rows);
    // A different seed changes the draws.
    auto d = execute(parse_pipeline(without_extra), {{"src", t}}, Seed{43});
    CHECK(rep_of(a, "jitter").sample().rows != rep_of(d, "jitter").sample().rows);
}

TEST_CASE("two equally parameterized noise nodes draw different values") {
    auto g = parse_pipeline(R"({
        "nodes": [
            {"id": "src", "op": "source", "params": {"table": "t"}},
            {"id": "n1", "op": "noise",
             "params": {"family": "laplace", "scale": 1, "columns": ["v"]}},
            {"id": "n2", "op": "noise",
             "params": {"family": "laplace", "scale": 1, "columns": ["v"]}}
        ],
        "edges": [["src", "n1", 0], ["src", "n2", 0]],
        "outputs": ["n1", "n2"]
    })");
    auto out = execute(g, {{"src", values_table({10, 20, 30})}}, Seed{0});
    CHECK(rep_of(out, "n1").sample().rows != rep_of(out, "n2").sample().rows);
}

TEST_CASE("execute surfaces runtime errors with the failing node id") {
    auto g = parse_pipeline(R"({
        "nodes": [
            {"id": "src", "op": "source", "params": {"table": "t"}},
            {"id": "kde", "op": "smooth_kde",
             "params": {"columns": ["v"], "bandwidth": "auto", "grid": [16]}}
        ],
        "edges": [["src", "kde", 0]],
        "outputs": ["kde"]
    })");
    // Constant data defeats the automatic bandwidth at run time.
    auto m = thrown_message<OpError>(
        [&] { execute(g, {{"src", values_table({3, 3, 3})}}, Seed{0}); });
    CHECK(contains(m, "kde"));
    CHECK(contains(m, "zero-variance"));
}

TEST_CASE("execute refuses invalid graphs and unbound sources") {
    auto bad = parse_pipeline(R"({
        "nodes": [
            {"id": "src", "op": "source", "params": {"table": "t"}},
            {"id": "agg", "op": "aggregate",
             "params": {"group_by": ["v"], "stats": ["count"]}},
            {"id": "again", "op": "aggregate",
             "params": {"group_by": ["v"], "stats": ["count"]}}
        ],
        "edges": [["src", "agg", 0], ["agg", "again", 0]],
        "outputs": ["again"]
    })");
    CHECK_THROWS_AS(execute(bad, {{"src", values_table({1})}}, Seed{0}), ValidationError);

    auto ok = parse_pipeline(R"({
        "nodes": [{"id": "src", "op": "source", "params": {"table": "t"}}],
        "outputs": ["src"]
    })");
    auto m = thrown_message<ValidationError>([&] { execute(ok, {}, Seed{0}); });
    CHECK(contains(m, "unbound"));
}

TEST_CASE("execute checks bound tables before running") {
    auto g = parse_pipeline(R"({
        "nodes": [{"id": "src", "op": "source", "params": {"table": "t"}}],
        "outputs": ["src"]
    })");
    Table ragged = values_table({1, 2});
    ragged.rows[1].clear();
    CHECK_THROWS_AS(execute(g, {{"src", ragged}}, Seed{0}), ValidationError);
}

TEST_CASE("a source output is full disclosure of the bound table") {
    auto g = parse_pipeline(R"({
        "nodes": [{"id": "src", "op": "source", "params": {"table": "t"}}],
        "outputs": ["src"]
    })");
    Table t = values_table({4, 5});
    auto out = execute(g, {{"src", t}}, Seed{9});
    const Representation& rep = rep_of(out, "src");
    CHECK(representation_family(rep) == Family::Full);
    CHECK(rep.sample().rows == t.rows);
    CHECK(rep.sample().source_id == "src"); // stamped when the table has none
}

TEST_CASE("execute layers members with their own kinds and lineage") {
    auto g = parse_pipeline(R"({
        "nodes": [
            {"id": "src", "op": "source", "params": {"table": "t"}},
            {"id": "kde", "op": "smooth_kde",
             "params": {"columns": ["v"], "bandwidth": [1.0], "grid": [8]}},
            {"id": "few", "op": "subsample", "params": {"n": 2}},
            {"id": "both", "op": "combine", "params": {"mode": "layer"}}
        ],
        "edges": [["src", "kde", 0], ["src", "few", 0],
                  ["kde", "both", 0], ["few", "both", 1]],
        "outputs": ["both"]
    })");
    auto out = execute(g, {{"src", values_table({1, 2, 3, 4})}}, Seed{1});
    const auto& bundle = std::get<LayerBundle>(out.at("both"));
    REQUIRE(bundle.members.size() == 2);
    CHECK(bundle.members[0].kind() == RepKind::Model);   // slot order preserved
    CHECK(bundle.members[1].kind() == RepKind::Sample);
    CHECK(bundle.members[0].lineage.back().op == "smooth_kde");
    CHECK(bundle.members[1].lineage.back().op == "subsample");
}
