#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "aperture/error.hpp"
#include "aperture/representation.hpp"
#include "aperture/stats.hpp"
#include "aperture/tactics.hpp"

using namespace aperture;
using namespace aperture::tactics;

namespace {

Representation numeric_sample(const std::string& name, const std::vector<double>& values) {
    Table t;
    t.columns = {Column{name, ColumnKind::Continuous, {}, {}}};
    for (double v : values) t.rows.push_back({Cell{v}});
    return full_disclosure(t);
}

Representation xy_sample(const std::vector<std::pair<double, double>>& points) {
    Table t;
    t.columns = {Column{"x", ColumnKind::Continuous, {}, {}},
                 Column{"y", ColumnKind::Continuous, {}, {}}};
    for (auto [x, y] : points) t.rows.push_back({Cell{x}, Cell{y}});
    return full_disclosure(t);
}

std::vector<std::string> labels_of(const Representation& rep, const std::string& col) {
    const Table& t = rep.sample();
    std::size_t ci = t.column_index(col);
    std::vector<std::string> out;
    for (const auto& row : t.rows) out.push_back(as_text(row[ci]));
    return out;
}

std::multiset<double> column_multiset(const Table& t, const std::string& col) {
    std::multiset<double> out;
    for (double v : t.numeric_values(t.column_index(col))) out.insert(v);
    return out;
}

// Stat cell of the group whose first key is this nominal label.
double stat_for(const SummaryRep& s, const std::string& key, std::size_t stat) {
    for (const auto& g : s.groups)
        if (std::holds_alternative<std::string>(g.keys[0]) &&
            std::get<std::string>(g.keys[0]) == key)
            return as_number(g.stats[stat]);
    FAIL("no group keyed '" << key << "'");
    return 0.0;
}

} // namespace

// -------------------------------------------------------------- classify

TEST_CASE("classify with one covering bin labels every value the same") {
    auto out = classify(numeric_sample("v", {1, 5, 9}), "v", BinSpec::from_edges({0, 10}));
    CHECK(labels_of(out, "v__bin") == std::vector<std::string>{"[0, 10]", "[0, 10]", "[0, 10]"});
    CHECK(out.kind() == RepKind::Sample); // classification alone is not a summary
    CHECK(out.lineage.size() == 1);
    CHECK(out.lineage[0].op == "classify");
}

TEST_CASE("classify equal-width splits the range into right-open bins, last closed") {
    auto out = classify(numeric_sample("v", {0, 1, 2, 3}), "v",
                        BinSpec::equal_width(2, std::pair{0.0, 3.0}));
    auto labels = labels_of(out, "v__bin");
    CHECK(labels[0] == labels[1]); // 0 and 1 share [0, 1.5)
    CHECK(labels[2] == labels[3]); // 2 and 3 share [1.5, 3]
    CHECK(labels[0] != labels[2]);
    const auto& bins = out.sample().column("v__bin").bins;
    REQUIRE(bins.size() == 2);
    CHECK(bins[0].bounds == Interval{0.0, 1.5, true, false});
    CHECK(bins[1].bounds == Interval{1.5, 3.0, true, true});
}

TEST_CASE("classify equal-frequency sends boundary values to the lower bin") {
    auto out = classify(numeric_sample("v", {1, 2, 3, 4}), "v", BinSpec::equal_frequency(2));
    auto labels = labels_of(out, "v__bin");
    CHECK(labels[0] == labels[1]); // 1, 2 below the split at the 2nd sorted value
    CHECK(labels[2] == labels[3]);
    CHECK(labels[1] != labels[2]);
    const auto& bins = out.sample().column("v__bin").bins;
    REQUIRE(bins.size() == 2);
    CHECK(bins[0].bounds.contains(2.0));
    CHECK_FALSE(bins[1].bounds.contains(2.0));
}

TEST_CASE("classify partitions are disjoint and cover the edge range") {
    auto out = classify(numeric_sample("v", {0.5, 3.3, 7.7, 9.9}), "v",
                        BinSpec::from_edges({0, 2, 5, 10}));
    const auto& bins = out.sample().column("v__bin").bins;
    for (double probe = 0.0; probe <= 10.0; probe += 0.1) {
        int hits = 0;
        for (const auto& b : bins)
            if (b.bounds.contains(probe)) ++hits;
        CAPTURE(probe);
        CHECK(hits == 1);
    }
}

TEST_CASE("classify drops missing and out-of-range rows and records the counts") {
    Table t;
    t.columns = {Column{"v", ColumnKind::Continuous, {}, {}}};
    t.rows = {{Cell{1.0}}, {missing_cell()}, {Cell{99.0}}};
    auto out = classify(full_disclosure(t), "v", BinSpec::from_edges({0, 10}));
    CHECK(out.sample().row_count() == 1);
    const auto& notes = out.lineage[0].notes;
    auto note = [&](const std::string& key) {
        for (const auto& [k, v] : notes)
            if (k == key) return v;
        return std::string{};
    };
    CHECK(note("dropped_missing") == "1");
    CHECK(note("dropped_out_of_range") == "1");
}

TEST_CASE("classify rejects bad parameters") {
    auto in = numeric_sample("v", {1, 2, 3});
    CHECK_THROWS_AS(classify(in, "v", BinSpec::from_edges({5, 5})), ValidationError);
    CHECK_THROWS_AS(classify(in, "v", BinSpec::from_edges({10})), ValidationError);
    CHECK_THROWS_AS(classify(in, "nope", BinSpec::from_edges({0, 1})), ValidationError);
    CHECK_THROWS_AS(classify(in, "v", BinSpec::equal_frequency(9)), ValidationError);

    Table nominal;
    nominal.columns = {Column{"s", ColumnKind::Nominal, {}, {}}};
    nominal.rows = {{Cell{std::string{"a"}}}};
    CHECK_THROWS_AS(classify(full_disclosure(nominal), "s", BinSpec::from_edges({0, 1})),
                    ValidationError);
}

// ------------------------------------------------------------ categorize

namespace {

Representation county_sample() {
    Table t;
    t.columns = {Column{"county", ColumnKind::Nominal, {}, {}}};
    for (const char* c : {"cook", "lake", "miami-dade"}) t.rows.push_back({Cell{std::string{c}}});
    return full_disclosure(t);
}

} // namespace

TEST_CASE("categorize maps nominal values into groups") {
    std::map<std::string, std::string> mapping{
        {"cook", "IL"}, {"lake", "IL"}, {"miami-dade", "FL"}};
    auto out = categorize(county_sample(), "county", mapping, std::nullopt);
    CHECK(labels_of(out, "county") == std::vector<std::string>{"IL", "IL", "FL"});
}

TEST_CASE("categorize identity mapping changes only the lineage") {
    std::map<std::string, std::string> identity{
        {"cook", "cook"}, {"lake", "lake"}, {"miami-dade", "miami-dade"}};
    auto out = categorize(county_sample(), "county", identity, std::nullopt);
    CHECK(labels_of(out, "county") == std::vector<std::string>{"cook", "lake", "miami-dade"});
    CHECK(out.lineage.size() == 1);
}

TEST_CASE("categorize names unmapped values when there is no default") {
    CHECK(contains(thrown_message<ValidationError>([&] {
                       categorize(county_sample(), "county", {{"cook", "IL"}}, std::nullopt);
                   }),
                   "lake"));
    auto out = categorize(county_sample(), "county", {{"cook", "IL"}}, std::string{"other"});
    CHECK(labels_of(out, "county") == std::vector<std::string>{"IL", "other", "other"});
}

// ------------------------------------------------------------- aggregate

TEST_CASE("aggregate with no grouping reduces to one overall group") {
    auto out = aggregate(numeric_sample("v", {42.0}), {}, {StatSpec::parse("mean(v)")});
    REQUIRE(out.kind() == RepKind::Summary);
    const SummaryRep& s = out.summary();
    REQUIRE(s.groups.size() == 1);
    CHECK(as_number(s.groups[0].stats[0]) == 42.0);
}

TEST_CASE("aggregate groups by a label column") {
    Table t;
    t.columns = {Column{"label", ColumnKind::Nominal, {}, {}},
                 Column{"v", ColumnKind::Continuous, {}, {}}};
    t.rows = {{Cell{std::string{"A"}}, Cell{1.0}},
              {Cell{std::string{"A"}}, Cell{3.0}},
              {Cell{std::string{"B"}}, Cell{5.0}}};
    auto out = aggregate(full_disclosure(t), {"label"},
                         {StatSpec::parse("mean(v)"), StatSpec::parse("count")});
    const SummaryRep& s = out.summary();
    REQUIRE(s.groups.size() == 2);
    CHECK(stat_for(s, "A", 0) == 2.0);
    CHECK(stat_for(s, "B", 0) == 5.0);
    CHECK(stat_for(s, "A", 1) == 2.0);
    CHECK(stat_for(s, "B", 1) == 1.0);
}

TEST_CASE("aggregate of an empty table yields zero groups") {
    Table t;
    t.columns = {Column{"v", ColumnKind::Continuous, {}, {}}};
    auto out = aggregate(full_disclosure(t), {}, {StatSpec::parse("count")});
    CHECK(out.summary().groups.empty());
}

TEST_CASE("aggregate group counts sum to the surviving row count") {
    Table t;
    t.columns = {Column{"k", ColumnKind::Nominal, {}, {}},
                 Column{"v", ColumnKind::Continuous, {}, {}}};
    const char* keys[] = {"a", "b", "a", "c", "b", "a"};
    for (int i = 0; i < 6; ++i) t.rows.push_back({Cell{std::string{keys[i]}}, Cell{double(i)}});
    t.rows.push_back({missing_cell(), Cell{9.0}}); // missing key drops the row
    auto out = aggregate(full_disclosure(t), {"k"},
                         {StatSpec::parse("count"), StatSpec::parse("sum(v)"),
                          StatSpec::parse("mean(v)")});
    const SummaryRep& s = out.summary();
    double total = 0.0;
    for (const auto& g : s.groups) {
        double count = as_number(g.stats[0]);
        total += count;
        // sum = count * mean within float tolerance
        CHECK(as_number(g.stats[1]) ==
              doctest::Approx(count * as_number(g.stats[2])).epsilon(1e-9));
    }
    CHECK(total == 6.0);
}

TEST_CASE("aggregate marks stats missing when a group has no usable values") {
    Table t;
    t.columns = {Column{"k", ColumnKind::Nominal, {}, {}},
                 Column{"v", ColumnKind::Continuous, {}, {}}};
    t.rows = {{Cell{std::string{"a"}}, missing_cell()},
              {Cell{std::string{"b"}}, Cell{2.0}}};
    auto out = aggregate(full_disclosure(t), {"k"}, {StatSpec::parse("q0.5(v)")});
    const SummaryRep& s = out.summary();
    for (const auto& g : s.groups) {
        bool is_a = std::get<std::string>(g.keys[0]) == "a";
        CHECK(is_missing(g.stats[0]) == is_a);
    }
}

TEST_CASE("StatSpec::parse accepts the documented forms and nothing else") {
    CHECK(StatSpec::parse("count").kind == StatSpec::Kind::Count);
    CHECK(StatSpec::parse("mean(x)").column == "x");
    CHECK(StatSpec::parse("q0.25(x)").p == 0.25);
    CHECK(StatSpec::parse("q0.25(x)").name() == "q0.25(x)");
    CHECK_THROWS_AS(StatSpec::parse("mode(x)"), ParseError);
    CHECK_THROWS_AS(StatSpec::parse("mean"), ParseError);
    CHECK_THROWS_AS(StatSpec::parse("q1.5(x)"), ValidationError);
}

// ------------------------------------------------------------------ band

TEST_CASE("band quantiles 0 and 1 produce the min-max interval") {
    auto out = band(numeric_sample("v", {3, 1, 2}),
                    BandSpec{BandSpec::Mode::Quantiles, "v", {0.0, 1.0}});
    const SummaryRep& s = out.summary();
    REQUIRE(s.groups.size() == 1);
    CHECK(std::get<Interval>(s.groups[0].keys[0]) == Interval{1.0, 3.0, true, true});
    CHECK_FALSE(s.intervals_nested);
}

TEST_CASE("five-number banding of 1..9 lands on the exact quartiles") {
    std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9};
    auto out = band(numeric_sample("v", v),
                    BandSpec{BandSpec::Mode::Quantiles, "v", {0.0, 0.25, 0.5, 0.75, 1.0}});
    const SummaryRep& s = out.summary();
    REQUIRE(s.groups.size() == 4);
    double expected_edges[] = {1, 3, 5, 7, 9};
    for (std::size_t i = 0; i < 4; ++i) {
        const Interval& iv = std::get<Interval>(s.groups[i].keys[0]);
        CHECK(iv.lo == expected_edges[i]);
        CHECK(iv.hi == expected_edges[i + 1]);
    }
}

TEST_CASE("band quantiles equal a brute-force sorted interpolation") {
    std::vector<double> v{12.5, -3.0, 8.1, 8.1, 0.0, 99.0, 4.2};
    auto out = band(numeric_sample("v", v),
                    BandSpec{BandSpec::Mode::Quantiles, "v", {0.1, 0.4, 0.9}});
    std::sort(v.begin(), v.end());
    auto brute = [&](double p) {
        double h = p * static_cast<double>(v.size() - 1);
        auto i = static_cast<std::size_t>(h);
        if (i + 1 >= v.size()) return v.back();
        return v[i] + (h - static_cast<double>(i)) * (v[i + 1] - v[i]);
    };
    const SummaryRep& s = out.summary();
    CHECK(std::get<Interval>(s.groups[0].keys[0]).lo == brute(0.1));
    CHECK(std::get<Interval>(s.groups[0].keys[0]).hi == brute(0.4));
    CHECK(std::get<Interval>(s.groups[1].keys[0]).hi == brute(0.9));
}

TEST_CASE("band cut points make plain intervals with no statistics") {
    auto out = band(numeric_sample("v", {1, 4, 9}),
                    BandSpec{BandSpec::Mode::Cuts, "v", {0.0, 5.0, 10.0}});
    const SummaryRep& s = out.summary();
    CHECK(s.stat_names.empty());
    REQUIRE(s.groups.size() == 2);
    CHECK(std::get<Interval>(s.groups[0].keys[0]) == Interval{0.0, 5.0, true, false});
    CHECK(std::get<Interval>(s.groups[1].keys[0]) == Interval{5.0, 10.0, true, true});
}

TEST_CASE("band rejects bad levels") {
    auto in = numeric_sample("v", {1, 2, 3});
    CHECK_THROWS_AS(band(in, BandSpec{BandSpec::Mode::Quantiles, "v", {0.5}}), ValidationError);
    CHECK_THROWS_AS(band(in, BandSpec{BandSpec::Mode::Quantiles, "v", {0.5, 0.5}}),
                    ValidationError);
    CHECK_THROWS_AS(band(in, BandSpec{BandSpec::Mode::Quantiles, "v", {0.0, 1.5}}),
                    ValidationError);
    CHECK_THROWS_AS(band(in, BandSpec{BandSpec::Mode::MassLevels, "", {0.85}}),
                    ValidationError); // mass levels need a density model
}

TEST_CASE("band mass level emits the smallest covering high-density region") {
    // Hand-built 1D density over [0, 4): four cells, masses .4 .3 .2 .1.
    ModelRep m;
    m.evaluator = EvaluatorKind::DensityGrid;
    m.domain = {AxisDomain{"v", 0.0, 4.0, 4}};
    m.grid = {0.4, 0.3, 0.2, 0.1};
    auto out = band(make_model(m), BandSpec{BandSpec::Mode::MassLevels, "", {0.6}});
    const SummaryRep& s = out.summary();
    REQUIRE(s.groups.size() == 1);
    const auto& region = s.groups[0].region;
    REQUIRE(region.size() == 2); // cells 0 and 1 reach 0.7 >= 0.6
    CHECK(region[0].index == std::vector<int>{0});
    CHECK(region[1].index == std::vector<int>{1});
    CHECK(as_number(s.groups[0].stats[1]) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(s.grid_shape == std::vector<int>{4});
    // Removing the least-dense included cell drops below the level.
    CHECK(0.7 - region.back().mass < 0.6);
}

TEST_CASE("nested mass levels set intervals_nested") {
    ModelRep m;
    m.evaluator = EvaluatorKind::DensityGrid;
    m.domain = {AxisDomain{"v", 0.0, 4.0, 4}};
    m.grid = {0.4, 0.3, 0.2, 0.1};
    auto out = band(make_model(m), BandSpec{BandSpec::Mode::MassLevels, "", {0.5, 0.9}});
    CHECK(out.summary().intervals_nested);
    CHECK(out.summary().groups.size() == 2);
    // The wider level contains every cell of the narrower one.
    std::set<int> narrow, wide;
    for (const auto& rc : out.summary().groups[0].region) narrow.insert(rc.index[0]);
    for (const auto& rc : out.summary().groups[1].region) wide.insert(rc.index[0]);
    CHECK(std::includes(wide.begin(), wide.end(), narrow.begin(), narrow.end()));
}

// ---------------------------------------------------------------- derive

TEST_CASE("derive appends the evaluated expression as a fresh column") {
    auto out = derive(xy_sample({{1, 10}, {2, 20}}), "x + y", "sum");
    const Table& t = out.sample();
    CHECK(t.numeric_values(t.column_index("sum")) == std::vector<double>{11.0, 22.0});
    // Inputs untouched.
    CHECK(t.numeric_values(t.column_index("x")) == std::vector<double>{1.0, 2.0});
}

TEST_CASE("derive of a bare column copies it") {
    auto out = derive(numeric_sample("v", {1, 2, 3}), "v", "copy");
    const Table& t = out.sample();
    CHECK(t.numeric_values(t.column_index("copy")) == t.numeric_values(t.column_index("v")));
}

TEST_CASE("derive of a constant fills the column with it") {
    auto out = derive(numeric_sample("v", {1, 2}), "7", "seven");
    const Table& t = out.sample();
    CHECK(t.numeric_values(t.column_index("seven")) == std::vector<double>{7.0, 7.0});
    auto quot = derive(numeric_sample("v", {0}), "10 / 4", "q");
    CHECK(as_number(quot.sample().rows[0][1]) == 2.5);
}

TEST_CASE("derive marks division by zero missing and counts it in lineage") {
    auto out = derive(xy_sample({{1, 0}, {4, 2}}), "x / y", "ratio");
    const Table& t = out.sample();
    std::size_t ri = t.column_index("ratio");
    CHECK(is_missing(t.rows[0][ri]));
    CHECK(as_number(t.rows[1][ri]) == 2.0);
    bool counted = false;
    for (const auto& [k, v] : out.lineage[0].notes)
        counted = counted || (k == "non_finite_results" && v == "1");
    CHECK(counted);
}

TEST_CASE("derive refuses to shadow an existing column") {
    CHECK_THROWS_AS(derive(numeric_sample("v", {1}), "v + 1", "v"), ValidationError);
}

// ----------------------------------------------------------- encode_select

TEST_CASE("encode_select keeps the named columns and logs the dropped ones") {
    Table t;
    t.columns = {Column{"a", ColumnKind::Continuous, {}, {}},
                 Column{"b", ColumnKind::Continuous, {}, {}},
                 Column{"c", ColumnKind::Continuous, {}, {}}};
    t.rows = {{Cell{1.0}, Cell{2.0}, Cell{3.0}}};
    auto out = encode_select(full_disclosure(t), {"a", "c"});
    CHECK(out.sample().column_count() == 2);
    CHECK(out.sample().columns[0].name == "a");
    CHECK(out.sample().columns[1].name == "c");
    bool logged = false;
    for (const auto& [k, v] : out.lineage[0].notes) logged = logged || (k == "dropped" && v == "b");
    CHECK(logged);

    auto all = encode_select(full_disclosure(t), {"a", "b", "c"});
    CHECK(all.sample().column_count() == 3);
    CHECK(all.sample().rows == t.rows);
}

TEST_CASE("encode_select rejects unknown columns and empty selections") {
    auto in = numeric_sample("v", {1});
    CHECK_THROWS_AS(encode_select(in, {"nope"}), ValidationError);
    CHECK_THROWS_AS(encode_select(in, {}), ValidationError);
    CHECK_THROWS_AS(encode_select(in, {"v", "v"}), ValidationError);
}

TEST_CASE("encode_select on a summary cannot drop a grouping axis") {
    auto summ = aggregate(numeric_sample("v", {1, 2}), {}, {StatSpec::parse("count"),
                                                            StatSpec::parse("mean(v)")});
    auto kept = encode_select(summ, {"count"});
    CHECK(kept.summary().stat_names == std::vector<std::string>{"count"});

    Table t;
    t.columns = {Column{"k", ColumnKind::Nominal, {}, {}},
                 Column{"v", ColumnKind::Continuous, {}, {}}};
    t.rows = {{Cell{std::string{"a"}}, Cell{1.0}}};
    auto grouped = aggregate(full_disclosure(t), {"k"}, {StatSpec::parse("count")});
    CHECK_THROWS_AS(encode_select(grouped, {"count"}), ValidationError);
}

// -------------------------------------------------------------- subsample

TEST_CASE("subsample of every row preserves the multiset") {
    auto in = numeric_sample("v", {5, 1, 4, 1, 3});
    auto out = subsample(in, 5, false, Seed{7});
    CHECK(column_multiset(out.sample(), "v") == column_multiset(in.sample(), "v"));
}

TEST_CASE("subsample of zero rows empties the table") {
    auto out = subsample(numeric_sample("v", {1, 2, 3}), 0, false, Seed{0});
    CHECK(out.sample().row_count() == 0);
    CHECK(out.sample().column_count() == 1);
}

TEST_CASE("subsample without replacement draws a sub-multiset") {
    auto in = numeric_sample("v", {5, 1, 4, 1, 3, 9, 2});
    auto out = subsample(in, 4, false, Seed{11});
    auto all = column_multiset(in.sample(), "v");
    auto got = column_multiset(out.sample(), "v");
    CHECK(got.size() == 4);
    CHECK(std::includes(all.begin(), all.end(), got.begin(), got.end()));
}

TEST_CASE("subsample repeats exactly under a fixed seed") {
    auto in = numeric_sample("v", {5, 1, 4, 1, 3, 9, 2});
    auto a = subsample(in, 3, false, Seed{42});
    auto b = subsample(in, 3, false, Seed{42});
    CHECK(a.sample().rows == b.sample().rows);
    auto c = subsample(in, 3, true, Seed{42});
    auto d = subsample(in, 3, true, Seed{42});
    CHECK(c.sample().rows == d.sample().rows);
}

TEST_CASE("subsample bounds-checks draws without replacement") {
    auto in = numeric_sample("v", {1, 2});
    CHECK_THROWS_AS(subsample(in, 3, false, Seed{0}), ValidationError);
    CHECK(subsample(in, 5, true, Seed{0}).sample().row_count() == 5);
}

TEST_CASE("shuffle_prefix reproduces the frozen Fisher-Yates traces") {
    RngStream rng(Seed{0});
    CHECK(shuffle_prefix(8, 8, rng) == std::vector<std::size_t>{7, 4, 2, 0, 1, 5, 6, 3});
    RngStream rng42(Seed{42});
    CHECK(shuffle_prefix(10, 4, rng42) == std::vector<std::size_t>{7, 2, 4, 5});
}

// ------------------------------------------------------------------ noise

TEST_CASE("noise with zero scale is the identity on values") {
    auto in = xy_sample({{1.5, -2.0}, {3.25, 0.0}});
    for (auto family : {NoiseModel::Family::Gaussian, NoiseModel::Family::Laplace}) {
        NoiseModel m{family, 0.0, {"x", "y"}};
        auto out = noise(in, m, Seed{5});
        CHECK(out.sample().rows == in.sample().rows);
    }
}

TEST_CASE("noise perturbs every targeted value and repeats under the seed") {
    auto in = numeric_sample("v", {10, 20, 30});
    NoiseModel m{NoiseModel::Family::Gaussian, 1.0, {"v"}};
    auto a = noise(in, m, Seed{3});
    auto b = noise(in, m, Seed{3});
    CHECK(a.sample().rows == b.sample().rows);
    auto vals = a.sample().numeric_values(0);
    for (std::size_t i = 0; i < vals.size(); ++i) CHECK(vals[i] != double(10 * (i + 1)));
    auto other = noise(in, m, Seed{4});
    CHECK(other.sample().rows != a.sample().rows);
}

TEST_CASE("noise leaves untargeted columns alone") {
    auto in = xy_sample({{1, 100}, {2, 200}});
    NoiseModel m{NoiseModel::Family::Laplace, 0.5, {"x"}};
    auto out = noise(in, m, Seed{1});
    const Table& t = out.sample();
    CHECK(t.numeric_values(t.column_index("y")) == std::vector<double>{100.0, 200.0});
}

TEST_CASE("noise validates its parameters") {
    auto in = numeric_sample("v", {1});
    CHECK_THROWS_AS(noise(in, NoiseModel{NoiseModel::Family::Gaussian, -1.0, {"v"}}, Seed{0}),
                    ValidationError);
    CHECK_THROWS_AS(noise(in, NoiseModel{NoiseModel::Family::Gaussian, 1.0, {}}, Seed{0}),
                    ValidationError);
    CHECK_THROWS_AS(noise(in, NoiseModel{NoiseModel::Family::Gaussian, 1.0, {"nope"}}, Seed{0}),
                    ValidationError);
}

// ---------------------------------------------------------------- permute

TEST_CASE("permute preserves the column multiset and the other columns") {
    auto in = xy_sample({{1, 10}, {2, 20}, {3, 30}, {4, 40}, {5, 50}});
    auto out = permute(in, "x", Seed{2});
    const Table& t = out.sample();
    CHECK(column_multiset(t, "x") == column_multiset(in.sample(), "x"));
    CHECK(t.numeric_values(t.column_index("y")) ==
          std::vector<double>{10, 20, 30, 40, 50});
}

TEST_CASE("permute of a single row is the identity") {
    auto in = xy_sample({{1, 10}});
    auto out = permute(in, "x", Seed{99});
    CHECK(out.sample().rows == in.sample().rows);
}

TEST_CASE("permute follows the seeded Fisher-Yates order") {
    std::vector<double> v{0, 1, 2, 3, 4, 5, 6, 7};
    auto out = permute(numeric_sample("v", v), "v", Seed{0});
    // Order equals the frozen shuffle_prefix(8, 8, seed 0) trace.
    CHECK(out.sample().numeric_values(0) ==
          std::vector<double>{7, 4, 2, 0, 1, 5, 6, 3});
}

// ------------------------------------------------------------- smooth_kde

TEST_CASE("smooth_kde of a single point peaks at the cell nearest the point") {
    KdeSpec spec;
    spec.columns = {"v"};
    spec.bandwidth = {1.0};
    spec.grid_n = {21};
    spec.range = {std::pair{-3.0, 3.0}};
    auto out = smooth_kde(numeric_sample("v", {0.0}), spec);
    REQUIRE(out.kind() == RepKind::Model);
    const ModelRep& m = out.model();
    auto argmax = std::max_element(m.grid.begin(), m.grid.end()) - m.grid.begin();
    double center = m.axis_center(0, static_cast<int>(argmax));
    CHECK(std::fabs(center) <= (3.0 - -3.0) / 21.0 / 2.0 + 1e-12);
}

TEST_CASE("smooth_kde of -1 and +1 evaluates to phi(1) at zero") {
    KdeSpec spec;
    spec.columns = {"v"};
    spec.bandwidth = {1.0};
    spec.grid_n = {25};
    spec.range = {std::pair{-4.0, 4.0}}; // odd cell count puts a center at 0
    auto out = smooth_kde(numeric_sample("v", {-1.0, 1.0}), spec);
    const ModelRep& m = out.model();
    CHECK(m.axis_center(0, 12) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.grid[12] == doctest::Approx(0.24197072451914337).epsilon(1e-12));
}

TEST_CASE("smooth_kde density integrates to one") {
    KdeSpec spec;
    spec.columns = {"v"};
    spec.grid_n = {200};
    auto out = smooth_kde(numeric_sample("v", {1, 2, 2, 3, 5, 8, 13, 9, 4, 6}), spec);
    const ModelRep& m = out.model();
    double mass = 0.0;
    for (double d : m.grid) mass += d * m.cell_volume();
    CHECK(mass == doctest::Approx(1.0).epsilon(0.01));
    // Auto bandwidth lands in the params, named per axis.
    REQUIRE(m.params.size() == 1);
    CHECK(m.param_names[0] == "bandwidth(v)");
    CHECK(m.params[0] > 0.0);
}

TEST_CASE("smooth_kde 2D product kernel also integrates to one") {
    KdeSpec spec;
    spec.columns = {"x", "y"};
    spec.grid_n = {60, 60};
    auto out = smooth_kde(xy_sample({{0, 0}, {1, 2}, {2, 1}, {3, 3}, {1, 1}, {2, 2}}), spec);
    const ModelRep& m = out.model();
    double mass = 0.0;
    for (double d : m.grid) mass += d * m.cell_volume();
    CHECK(mass == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("smooth_kde rejects degenerate inputs") {
    KdeSpec spec;
    spec.columns = {"v"};
    spec.grid_n = {16};
    // Auto bandwidth on constant data has no spread to work with.
    CHECK_THROWS_AS(smooth_kde(numeric_sample("v", {3, 3, 3}), spec), OpError);
    CHECK_THROWS_AS(smooth_kde(numeric_sample("v", {1}), spec), OpError);
    KdeSpec zero = spec;
    zero.bandwidth = {0.0};
    CHECK_THROWS_AS(smooth_kde(numeric_sample("v", {1, 2}), zero), ValidationError);
    KdeSpec tiny = spec;
    tiny.grid_n = {1};
    CHECK_THROWS_AS(smooth_kde(numeric_sample("v", {1, 2}), tiny), ValidationError);
}

// ------------------------------------------------------- magnitude_adjust

TEST_CASE("magnitude_adjust weight function follows clamp(1 - u/u_max, 0, 1)") {
    AdjustmentSpec spec{0.0, 10.0, "v", "u"};
    CHECK(spec.weight(0.0) == 1.0);
    CHECK(spec.weight(5.0) == 0.5);
    CHECK(spec.weight(10.0) == 0.0);
    CHECK(spec.weight(25.0) == 0.0);
    CHECK(spec.weight(-5.0) == 1.0); // clamped above as well
}

TEST_CASE("magnitude_adjust pulls values toward the pivot by uncertainty") {
    Table t;
    t.columns = {Column{"v", ColumnKind::Continuous, {}, {}},
                 Column{"u", ColumnKind::Continuous, {}, {}}};
    t.rows = {{Cell{10.0}, Cell{0.0}},   // certain: unchanged
              {Cell{10.0}, Cell{5.0}},   // halfway
              {Cell{10.0}, Cell{10.0}},  // fully suppressed
              {Cell{10.0}, Cell{50.0}}}; // beyond u_max: still the pivot
    AdjustmentSpec spec{0.0, 10.0, "v", "u"};
    auto out = magnitude_adjust(full_disclosure(t), spec);
    auto vals = out.sample().numeric_values(0);
    CHECK(vals == std::vector<double>{10.0, 5.0, 0.0, 0.0});
}

TEST_CASE("magnitude_adjust works on summary statistics too") {
    Table t;
    t.columns = {Column{"k", ColumnKind::Nominal, {}, {}},
                 Column{"v", ColumnKind::Continuous, {}, {}},
                 Column{"u", ColumnKind::Continuous, {}, {}}};
    t.rows = {{Cell{std::string{"a"}}, Cell{8.0}, Cell{2.0}}};
    auto summ = aggregate(full_disclosure(t), {"k"},
                          {StatSpec::parse("mean(v)"), StatSpec::parse("mean(u)")});
    AdjustmentSpec spec{0.0, 4.0, "mean(v)", "mean(u)"};
    auto out = magnitude_adjust(summ, spec);
    CHECK(out.kind() == RepKind::Summary);
    CHECK(as_number(out.summary().groups[0].stats[0]) == 4.0); // w(2) = 0.5
}

TEST_CASE("magnitude_adjust validates u_max") {
    AdjustmentSpec spec{0.0, 0.0, "v", "u"};
    CHECK_THROWS_AS(magnitude_adjust(numeric_sample("v", {1}), spec), ValidationError);
}

// ------------------------------------------------------------- predict_ols

TEST_CASE("predict_ols recovers an exact line") {
    auto out = predict_ols(xy_sample({{0, 1}, {1, 3}}), "y", {"x"});
    REQUIRE(out.kind() == RepKind::Model);
    const ModelRep& m = out.model();
    CHECK(m.evaluator == EvaluatorKind::OlsLine);
    REQUIRE(m.params.size() == 2);
    CHECK(m.params[0] == doctest::Approx(1.0).epsilon(1e-12)); // intercept
    CHECK(m.params[1] == doctest::Approx(2.0).epsilon(1e-12)); // slope
    REQUIRE(m.attachment.has_value());
    const Table& fit = *m.attachment;
    std::size_t fc = fit.column_index("y_fitted");
    CHECK(as_number(fit.rows[0][fc]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(as_number(fit.rows[1][fc]) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("predict_ols on constant response gives slope zero, intercept mean") {
    auto out = predict_ols(xy_sample({{0, 5}, {1, 5}, {2, 5}}), "y", {"x"});
    CHECK(out.model().params[0] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(out.model().params[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("predict_ols residuals are orthogonal to the design") {
    auto in = xy_sample({{0.0, 2.1}, {1.0, 3.9}, {2.0, 6.2}, {3.0, 7.8}, {4.0, 10.1}});
    auto out = predict_ols(in, "y", {"x"});
    const Table& fit = *out.model().attachment;
    std::size_t xi = fit.column_index("x"), yi = fit.column_index("y"),
                fi = fit.column_index("y_fitted");
    double dot_x = 0.0, dot_1 = 0.0;
    for (const auto& row : fit.rows) {
        double r = as_number(row[yi]) - as_number(row[fi]);
        dot_x += r * as_number(row[xi]);
        dot_1 += r;
    }
    CHECK(std::fabs(dot_x) < 1e-9);
    CHECK(std::fabs(dot_1) < 1e-9);
}

TEST_CASE("predict_ols names collinear columns and rejects bad shapes") {
    auto in = derive(numeric_sample("x", {1, 2, 3}), "x + x", "x2");
    auto with_y = derive(in, "x * 3", "y");
    CHECK(contains(
        thrown_message<OpError>([&] { predict_ols(with_y, "y", {"x", "x2"}); }), "x2"));
    CHECK_THROWS_AS(predict_ols(xy_sample({{1, 2}}), "y", {"x"}), OpError); // too few rows
    CHECK_THROWS_AS(predict_ols(xy_sample({{1, 2}, {2, 3}}), "y", {"y"}), ValidationError);
    CHECK_THROWS_AS(predict_ols(xy_sample({{1, 2}, {2, 3}}), "y", {}), ValidationError);
}

// ------------------------------------------------------------- project_pca

TEST_CASE("project_pca on the line y = x finds the diagonal loading") {
    auto out = project_pca(xy_sample({{-2, -2}, {-1, -1}, {1, 1}, {2, 2}}), {"x", "y"}, 2);
    const ModelRep& m = out.model();
    CHECK(m.evaluator == EvaluatorKind::PcaLoadings);
    // Params: loadings row-major, then eigenvalues, then column means.
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(m.params[0] == doctest::Approx(inv_sqrt2).epsilon(1e-9));
    CHECK(m.params[1] == doctest::Approx(inv_sqrt2).epsilon(1e-9));
    std::size_t eig0 = 4; // after the 2x2 loading block
    CHECK(m.params[eig0 + 1] == doctest::Approx(0.0).epsilon(1e-9)); // second eigenvalue
}

TEST_CASE("project_pca matches the closed-form diagonal covariance case") {
    // Four points engineered so the sample covariance is exactly diag(2, 1).
    double a = std::sqrt(3.0), b = std::sqrt(1.5);
    auto out = project_pca(xy_sample({{a, 0}, {-a, 0}, {0, b}, {0, -b}}), {"x", "y"}, 2);
    const ModelRep& m = out.model();
    CHECK(m.params[0] == doctest::Approx(1.0).epsilon(1e-6)); // pc1 = x axis
    CHECK(m.params[1] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(m.params[2] == doctest::Approx(0.0).epsilon(1e-6)); // pc2 = y axis
    CHECK(m.params[3] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(m.params[4] == doctest::Approx(2.0).epsilon(1e-6)); // eigenvalues
    CHECK(m.params[5] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("project_pca loadings are orthonormal with non-increasing eigenvalues") {
    auto in = xy_sample({{1.0, 0.3}, {2.1, 1.9}, {3.2, 2.2}, {0.4, 1.1}, {2.8, 0.7},
                         {1.6, 2.5}});
    auto out = project_pca(in, {"x", "y"}, 2);
    const ModelRep& m = out.model();
    double l[2][2] = {{m.params[0], m.params[1]}, {m.params[2], m.params[3]}};
    CHECK(l[0][0] * l[0][0] + l[0][1] * l[0][1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(l[1][0] * l[1][0] + l[1][1] * l[1][1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::fabs(l[0][0] * l[1][0] + l[0][1] * l[1][1]) < 1e-9);
    CHECK(m.params[4] >= m.params[5]);
}

TEST_CASE("project_pca with the full basis reconstructs the centered data") {
    std::vector<std::pair<double, double>> pts{{1.0, 0.3}, {2.1, 1.9}, {3.2, 2.2},
                                               {0.4, 1.1}, {2.8, 0.7}};
    auto out = project_pca(xy_sample(pts), {"x", "y"}, 2);
    const ModelRep& m = out.model();
    double l[2][2] = {{m.params[0], m.params[1]}, {m.params[2], m.params[3]}};
    double mean_x = m.params[6], mean_y = m.params[7];
    const Table& emb = *m.attachment;
    REQUIRE(emb.row_count() == pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double p1 = as_number(emb.rows[i][0]), p2 = as_number(emb.rows[i][1]);
        double rx = mean_x + p1 * l[0][0] + p2 * l[1][0];
        double ry = mean_y + p1 * l[0][1] + p2 * l[1][1];
        CHECK(rx == doctest::Approx(pts[i].first).epsilon(1e-9));
        CHECK(ry == doctest::Approx(pts[i].second).epsilon(1e-9));
    }
}

TEST_CASE("project_pca validates k and rejects duplicates") {
    auto in = xy_sample({{1, 2}, {3, 4}});
    CHECK_THROWS_AS(project_pca(in, {"x", "y"}, 3), ValidationError);
    CHECK_THROWS_AS(project_pca(in, {"x", "y"}, 0), ValidationError);
    CHECK_THROWS_AS(project_pca(in, {"x", "x"}, 1), ValidationError);
    CHECK_THROWS_AS(project_pca(xy_sample({{1, 2}}), {"x", "y"}, 1), OpError);
}

// --------------------------------------------------------------- families

TEST_CASE("full_disclosure wraps the table with an empty lineage") {
    Table t;
    t.columns = {Column{"v", ColumnKind::Continuous, {}, {}}};
    t.rows = {{Cell{1.0}}};
    auto rep = full_disclosure(t);
    CHECK(rep.kind() == RepKind::Sample);
    CHECK(rep.lineage.empty());
    CHECK(representation_family(rep) == Family::Full);
    CHECK(rep.sample().rows == t.rows);
}

TEST_CASE("representation_family follows the kind once a tactic has run") {
    auto sample = numeric_sample("v", {1, 2, 3, 4});
    CHECK(representation_family(permute(sample, "v", Seed{0})) == Family::Sampling);
    CHECK(representation_family(subsample(sample, 2, false, Seed{0})) == Family::Sampling);
    CHECK(representation_family(aggregate(sample, {}, {StatSpec::parse("count")})) ==
          Family::Summarizing);
    CHECK(representation_family(classify(sample, "v", BinSpec::from_edges({0, 5}))) ==
          Family::Sampling);
    KdeSpec kde;
    kde.columns = {"v"};
    kde.grid_n = {16};
    CHECK(representation_family(smooth_kde(sample, kde)) == Family::Modeling);
}

TEST_CASE("summarizing and modeling tactics respect the family grouping") {
    auto sample = numeric_sample("v", {1, 2, 3, 4});
    // classify/aggregate/band/derive/encode_select never produce a Model.
    CHECK(classify(sample, "v", BinSpec::from_edges({0, 5})).kind() != RepKind::Model);
    CHECK(aggregate(sample, {}, {StatSpec::parse("count")}).kind() != RepKind::Model);
    CHECK(band(sample, BandSpec{BandSpec::Mode::Quantiles, "v", {0.0, 1.0}}).kind() !=
          RepKind::Model);
    CHECK(derive(sample, "v + 1", "w").kind() != RepKind::Model);
    CHECK(encode_select(sample, {"v"}).kind() != RepKind::Model);
    // subsample/noise/permute stay Sample.
    CHECK(subsample(sample, 1, false, Seed{0}).kind() == RepKind::Sample);
    CHECK(noise(sample, NoiseModel{NoiseModel::Family::Gaussian, 1.0, {"v"}}, Seed{0}).kind() ==
          RepKind::Sample);
    CHECK(permute(sample, "v", Seed{0}).kind() == RepKind::Sample);
}

TEST_CASE("check_representation accepts every tactic output here") {
    auto sample = numeric_sample("v", {1, 2, 3, 4});
    CHECK_NOTHROW(check_representation(sample));
    CHECK_NOTHROW(check_representation(aggregate(sample, {}, {StatSpec::parse("count")})));
    KdeSpec kde;
    kde.columns = {"v"};
    kde.grid_n = {16};
    CHECK_NOTHROW(check_representation(smooth_kde(sample, kde)));
    CHECK_NOTHROW(check_representation(
        band(sample, BandSpec{BandSpec::Mode::Quantiles, "v", {0.0, 0.5, 1.0}})));
}
