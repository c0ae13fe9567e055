#include "aperture/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aperture/analysis.hpp"
#include "aperture/csv.hpp"
#include "aperture/error.hpp"
#include "aperture/format.hpp"
#include "aperture/pipeline.hpp"
#include "aperture/report.hpp"
#include "aperture/scenario.hpp"
#include "aperture/signals.hpp"
#include "aperture/svg.hpp"

namespace fs = std::filesystem;

namespace aperture {
namespace {

using nlohmann::ordered_json;

// ------------------------------------------------------------------- files

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// One artifact to write: path relative to the output directory + bytes.
// Commands collect everything in memory first and only then touch the
// filesystem, so a failing run leaves no partial output behind.
using FileSet = std::vector<std::pair<std::string, std::string>>;

void write_files(const fs::path& dir, const FileSet& files) {
    fs::create_directories(dir);
    for (const auto& [name, bytes] : files) {
        fs::path path = dir / name;
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw OpError("cannot write '" + path.string() + "'");
        out << bytes;
        if (!out) throw OpError("failed while writing '" + path.string() + "'");
    }
}

std::string dump_json(const ordered_json& j) { return j.dump(2) + "\n"; }

// ------------------------------------------------------------------ inputs

// --input NAME=CSVPATH; NAME picks the source node with that id, or the
// unique source node whose `table` parameter equals NAME.
std::map<std::string, Table> bind_inputs(const PipelineGraph& g,
                                         const std::vector<std::string>& specs) {
    std::map<std::string, Table> bound;
    for (const auto& spec : specs) {
        auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ValidationError("--input expects NAME=CSVPATH, got '" + spec + "'");
        std::string name = spec.substr(0, eq);
        std::string path = spec.substr(eq + 1);

        const PipelineNode* target = nullptr;
        for (const auto& n : g.nodes)
            if (n.op == "source" && n.id == name) target = &n;
        if (!target) {
            for (const auto& n : g.nodes) {
                if (n.op != "source") continue;
                if (!n.params.contains("table") || !n.params["table"].is_string()) continue;
                if (n.params["table"].get<std::string>() != name) continue;
                if (target)
                    throw ValidationError("input '" + name + "' is ambiguous: sources '" +
                                          target->id + "' and '" + n.id + "' both read it");
                target = &n;
            }
        }
        if (!target) throw ValidationError("input '" + name + "' matches no source node");
        if (bound.count(target->id))
            throw ValidationError("source '" + target->id + "' is bound twice");

        Table t = load_csv(path);
        t.source_id = name;
        bound.emplace(target->id, std::move(t));
    }
    return bound;
}

std::map<std::string, Table> bind_table(const PipelineGraph& g, const std::string& name,
                                        const Table& t) {
    std::map<std::string, Table> bound;
    for (const auto& n : g.nodes) {
        if (n.op != "source") continue;
        if (n.params.contains("table") && n.params["table"].is_string() &&
            n.params["table"].get<std::string>() == name)
            bound.emplace(n.id, t);
    }
    if (bound.empty())
        throw ValidationError("no source node reads table '" + name + "'");
    return bound;
}

// --------------------------------------------------------------- execution

std::string value_label(const SignalValue& v) {
    switch (v.kind) {
    case SignalValue::Kind::Number: return format_double(v.number);
    case SignalValue::Kind::Clusters: return "clusters";
    case SignalValue::Kind::Unanswerable: return "";
    }
    return "";
}

std::string distortions_csv(const std::vector<SignalReport>& signals) {
    std::string out = "output,signal,on_original,on_disclosed,abs_error,rel_error,hidden\n";
    for (const auto& s : signals) {
        std::string label = s.distortion.signal;
        for (char& c : label)
            if (c == ',') c = ';'; // keep the flat table unquoted
        out += s.output_id + "," + label + ",";
        out += value_label(s.distortion.on_original) + ",";
        out += value_label(s.distortion.on_disclosed) + ",";
        out += (s.distortion.abs_error ? format_double(*s.distortion.abs_error) : "") + ",";
        out += (s.distortion.rel_error ? format_double(*s.distortion.rel_error) : "") + ",";
        out += s.distortion.hidden ? "true" : "false";
        out += '\n';
    }
    return out;
}

void emit_rep_files(const std::string& stem, const Representation& rep, FileSet& files) {
    switch (rep.kind()) {
    case RepKind::Sample: files.emplace_back(stem + ".csv", write_csv(rep.sample())); break;
    case RepKind::Summary: files.emplace_back(stem + ".csv", summary_to_csv(rep.summary())); break;
    case RepKind::Model: files.emplace_back(stem + ".json", dump_json(model_to_json(rep.model()))); break;
    }
}

struct RunResult {
    FileSet files;            // everything cmd_run writes, in order
    std::string report_json;  // also present in `files`
    std::string report_text;
    std::vector<std::string> notes; // non-fatal remarks for stderr
};

// The full effect of `run`: execute, measure the declared signals against
// every output, render what has a natural chart, serialize the report.
RunResult run_pipeline(const PipelineGraph& g, const std::map<std::string, Table>& inputs,
                       Seed seed) {
    auto results = execute(g, inputs, seed);
    DisclosureReport report = disclosure_report(g, schemas_of_tables(inputs));

    std::vector<SignalReport> signal_reports;
    for (const auto& spec : parse_signals(ordered_json(g.signals))) {
        const Table& original = signal_original(spec, g, inputs);
        for (const auto& out_id : g.outputs) {
            const NodeOutput& out = results.at(out_id);
            std::vector<const Representation*> reps;
            if (std::holds_alternative<Representation>(out))
                reps.push_back(&std::get<Representation>(out));
            else
                for (const auto& member : std::get<LayerBundle>(out).members)
                    reps.push_back(&member);
            // A bundle answers through its first member that can; it hides
            // the signal only when every member does.
            std::optional<Distortion> chosen;
            for (const Representation* rep : reps) {
                Distortion d = distortion(spec, original, *rep);
                if (!chosen || (chosen->hidden && !d.hidden)) chosen = std::move(d);
                if (!chosen->hidden) break;
            }
            signal_reports.push_back(SignalReport{out_id, std::move(*chosen)});
        }
    }

    RunResult r;
    for (const auto& out_id : g.outputs) {
        const NodeOutput& out = results.at(out_id);
        if (std::holds_alternative<Representation>(out)) {
            const auto& rep = std::get<Representation>(out);
            emit_rep_files(out_id, rep, r.files);
            if (auto kind = default_chart_kind(rep))
                r.files.emplace_back(out_id + ".svg", render_svg(rep, *kind));
        } else {
            const auto& bundle = std::get<LayerBundle>(out);
            for (std::size_t k = 0; k < bundle.members.size(); ++k)
                emit_rep_files(out_id + "." + std::to_string(k + 1), bundle.members[k], r.files);
            try {
                r.files.emplace_back(out_id + ".svg", render_svg(bundle));
            } catch (const ValidationError& e) {
                r.notes.push_back("skipped SVG for '" + out_id + "': " + e.what());
            }
        }
    }
    r.report_json = dump_json(report_to_json(report, signal_reports));
    r.report_text = report_to_text(report, signal_reports);
    r.files.emplace_back("report.json", r.report_json);
    r.files.emplace_back("report.txt", r.report_text);
    r.files.emplace_back("distortions.csv", distortions_csv(signal_reports));
    return r;
}

// ---------------------------------------------------------------- commands

struct CommonFlags {
    std::string spec_path;
    std::vector<std::string> inputs;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    std::string format = "text";
};

int cmd_run(const CommonFlags& f, std::ostream& out, std::ostream& err) {
    PipelineGraph g = parse_pipeline(slurp(f.spec_path));
    auto inputs = bind_inputs(g, f.inputs);
    RunResult r = run_pipeline(g, inputs, Seed{f.seed});
    write_files(f.out_dir, r.files);
    for (const auto& note : r.notes) err << "note: " << note << "\n";
    out << (f.format == "json" ? r.report_json : r.report_text);
    return 0;
}

int cmd_analyze(const CommonFlags& f, std::ostream& out) {
    PipelineGraph g = parse_pipeline(slurp(f.spec_path));
    DisclosureReport report = disclosure_report(g, declared_schemas(g));
    std::string as_json = dump_json(report_to_json(report));
    std::string as_text = report_to_text(report);
    write_files(f.out_dir, {{"report.json", as_json}, {"report.txt", as_text}});
    out << (f.format == "json" ? as_json : as_text);
    return 0;
}

int cmd_sweep(const CommonFlags& f, const std::string& sweep_path, std::ostream& out) {
    PipelineGraph g = parse_pipeline(slurp(f.spec_path));
    auto inputs = bind_inputs(g, f.inputs);
    ordered_json config;
    try {
        config = ordered_json::parse(slurp(sweep_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("sweep config: ") + e.what());
    }
    auto [vary, objectives] = parse_sweep_config(config);
    auto points = sweep(g, vary, objectives, inputs, Seed{f.seed});
    std::string as_json = dump_json(sweep_to_json(points, vary, objectives));
    std::string as_csv = sweep_to_csv(points, vary, objectives);
    write_files(f.out_dir, {{"sweep.json", as_json}, {"sweep.csv", as_csv}});
    out << (f.format == "json" ? as_json : as_csv);
    return 0;
}

int cmd_scenario(const std::string& name, const CommonFlags& f, std::ostream& out,
                 std::ostream& err) {
    ScenarioSpec spec{name, Seed{f.seed}, 0};
    Table data = scenario_table(spec);

    FileSet files;
    files.emplace_back("dataset.csv", write_csv(data));
    std::vector<std::string> lines{name + "/dataset.csv"};
    std::vector<std::string> notes;
    for (const auto& variant : scenario_variants(name)) {
        PipelineGraph g = parse_pipeline(variant.pipeline_json);
        RunResult r = run_pipeline(g, bind_table(g, name, data), Seed{f.seed});
        files.emplace_back(variant.name + "/pipeline.json",
                           dump_json(ordered_json::parse(variant.pipeline_json)));
        for (auto& [file, bytes] : r.files)
            files.emplace_back(variant.name + "/" + file, std::move(bytes));
        for (const auto& n : r.notes) notes.push_back(variant.name + ": " + n);
        lines.push_back(name + "/" + variant.name + "/");
    }
    write_files(fs::path(f.out_dir) / name, files);
    for (const auto& n : notes) err << "note: " << n << "\n";
    for (const auto& l : lines) out << l << "\n";
    return 0;
}

int cmd_render(const CommonFlags& f, const std::string& kind_name, const std::string& x,
               const std::string& y, std::ostream& out) {
    if (f.inputs.size() != 1)
        throw ValidationError("render expects exactly one --input NAME=CSVPATH");
    auto eq = f.inputs[0].find('=');
    if (eq == std::string::npos || eq == 0)
        throw ValidationError("--input expects NAME=CSVPATH, got '" + f.inputs[0] + "'");
    std::string name = f.inputs[0].substr(0, eq);
    Representation rep = make_sample(load_csv(f.inputs[0].substr(eq + 1)));

    SvgStyle style;
    style.x_column = x;
    style.y_column = y;
    std::optional<ChartKind> kind;
    if (!kind_name.empty()) kind = chart_kind_from_name(kind_name);
    else kind = default_chart_kind(rep);
    if (!kind) throw ValidationError("no chart kind suits this input; pass --kind");

    write_files(f.out_dir, {{name + ".svg", render_svg(rep, *kind, style)}});
    out << name + ".svg" << "\n";
    return 0;
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"disclosure-first data transformation pipelines"};
    app.name("aperture");
    app.require_subcommand(1);

    CommonFlags f;
    auto add_common = [&](CLI::App* sub, bool spec, bool inputs) {
        if (spec) sub->add_option("--spec", f.spec_path, "pipeline document (JSON)")->required();
        if (inputs) sub->add_option("--input", f.inputs, "bind NAME=CSVPATH to a source node");
        sub->add_option("--seed", f.seed, "root RNG seed (default 0)");
        sub->add_option("--out", f.out_dir, "output directory (default .)");
        sub->add_option("--format", f.format, "stdout format")
            ->check(CLI::IsMember({"json", "text"}));
    };

    CLI::App* run = app.add_subcommand("run", "execute a pipeline and write its artifacts");
    add_common(run, true, true);

    CLI::App* analyze =
        app.add_subcommand("analyze", "static disclosure report, no data needed");
    add_common(analyze, true, false);

    std::string sweep_path;
    CLI::App* sweep = app.add_subcommand("sweep", "grid-evaluate parameters against signals");
    add_common(sweep, true, true);
    sweep->add_option("--sweep", sweep_path, "sweep config (JSON)")->required();

    std::string scenario_name;
    CLI::App* scenario =
        app.add_subcommand("scenario", "reproduce a bundled worked example");
    scenario->add_option("name", scenario_name, "fred | anne | claudia")->required();
    add_common(scenario, false, false);

    std::string kind_name, x_column, y_column;
    CLI::App* render = app.add_subcommand("render", "chart one CSV as an SVG");
    add_common(render, false, true);
    render->add_option("--kind", kind_name, "dotplot | scatter (CSV input is sample data)");
    render->add_option("--x", x_column, "x column");
    render->add_option("--y", y_column, "y column");

    std::vector<const char*> argv{"aperture"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        if (*run) return cmd_run(f, out, err);
        if (*analyze) return cmd_analyze(f, out);
        if (*sweep) return cmd_sweep(f, sweep_path, out);
        if (*scenario) return cmd_scenario(scenario_name, f, out, err);
        if (*render) return cmd_render(f, kind_name, x_column, y_column, out);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace aperture
