#include "aperture/report.hpp"

#include <algorithm>

#include "aperture/csv.hpp"
#include "aperture/format.hpp"

namespace aperture {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json signal_value_to_json(const SignalValue& v) {
    ordered_json j;
    switch (v.kind) {
    case SignalValue::Kind::Number:
        j["kind"] = "number";
        j["value"] = v.number;
        if (v.bound) j["bound"] = {v.bound->first, v.bound->second};
        break;
    case SignalValue::Kind::Clusters: {
        j["kind"] = "clusters";
        ordered_json arr = ordered_json::array();
        for (const auto& c : v.clusters) {
            ordered_json cj;
            cj["centroid"] = c.centroid;
            ordered_json bbox = ordered_json::array();
            for (const auto& iv : c.bbox) bbox.push_back({iv.lo, iv.hi});
            cj["bbox"] = std::move(bbox);
            cj["mass"] = c.mass;
            arr.push_back(std::move(cj));
        }
        j["clusters"] = std::move(arr);
        break;
    }
    case SignalValue::Kind::Unanswerable: j["kind"] = "unanswerable"; break;
    }
    return j;
}

ordered_json distortion_to_json(const Distortion& d) {
    ordered_json j;
    j["signal"] = d.signal;
    j["on_original"] = signal_value_to_json(d.on_original);
    j["on_disclosed"] = signal_value_to_json(d.on_disclosed);
    if (d.abs_error) j["abs_error"] = *d.abs_error;
    if (d.rel_error) j["rel_error"] = *d.rel_error;
    j["hidden"] = d.hidden;
    return j;
}

ordered_json finding_to_json(const Finding& f) {
    ordered_json j;
    j["category"] = finding_category_name(f.category);
    j["rule"] = f.rule_id;
    j["node"] = f.node_id;
    j["subject"] = f.subject;
    j["justification"] = f.justification;
    return j;
}

ordered_json report_to_json(const DisclosureReport& report,
                            const std::vector<SignalReport>& signals) {
    ordered_json j;
    j["version"] = 1;

    ordered_json outputs = ordered_json::array();
    for (const auto& out : report.outputs) {
        ordered_json oj;
        oj["id"] = out.output_id;
        oj["kind"] = out.kind;
        oj["family"] = out.family;
        ordered_json cols = ordered_json::array();
        for (const auto& col : out.columns) {
            ordered_json cj;
            cj["column"] = col.column;
            cj["status"] = column_status_name(col.status);
            cj["causes"] = col.causes;
            cols.push_back(std::move(cj));
        }
        oj["columns"] = std::move(cols);
        outputs.push_back(std::move(oj));
    }
    j["outputs"] = std::move(outputs);

    ordered_json findings = ordered_json::array();
    for (const auto& f : report.findings) findings.push_back(finding_to_json(f));
    j["findings"] = std::move(findings);

    ordered_json sigs = ordered_json::array();
    for (const auto& s : signals) {
        ordered_json sj = distortion_to_json(s.distortion);
        sj["output"] = s.output_id;
        sigs.push_back(std::move(sj));
    }
    j["signals"] = std::move(sigs);

    j["caveat"] = report.caveat;
    return j;
}

namespace {

std::string join_list(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& i : items) out += (out.empty() ? "" : ", ") + i;
    return out;
}

std::string value_text(const SignalValue& v) {
    switch (v.kind) {
    case SignalValue::Kind::Number: {
        std::string out = format_double(v.number);
        if (v.bound)
            out += " (bound [" + format_double(v.bound->first) + ", " +
                   format_double(v.bound->second) + "])";
        return out;
    }
    case SignalValue::Kind::Clusters:
        return std::to_string(v.clusters.size()) + " cluster(s)";
    case SignalValue::Kind::Unanswerable: return "unanswerable";
    }
    return "?";
}

} // namespace

std::string report_to_text(const DisclosureReport& report,
                           const std::vector<SignalReport>& signals) {
    std::string out;
    out += "DISCLOSURE REPORT\n";
    out += "=================\n\n";

    out += "Outputs\n";
    out += "-------\n";
    for (const auto& o : report.outputs) {
        out += o.output_id + ": " + o.kind + " (" + o.family + ")\n";
        for (const auto& c : o.columns) {
            out += "  " + c.column + ": " + column_status_name(c.status);
            if (!c.causes.empty()) out += " by " + join_list(c.causes);
            out += "\n";
        }
    }
    out += "\n";

    out += "Findings\n";
    out += "--------\n";
    if (report.findings.empty()) out += "(none)\n";
    for (const auto& f : report.findings) {
        out += std::string(finding_category_name(f.category)) + " " + f.rule_id + " at " +
               f.node_id;
        if (!f.subject.empty()) out += " [" + join_list(f.subject) + "]";
        out += ": " + f.justification + "\n";
    }
    out += "\n";

    if (!signals.empty()) {
        out += "Signals\n";
        out += "-------\n";
        for (const auto& s : signals) {
            const Distortion& d = s.distortion;
            out += d.signal + " @ " + s.output_id + ": original " + value_text(d.on_original) +
                   ", disclosed " + value_text(d.on_disclosed);
            if (d.abs_error)
                out += ", abs error " + format_double(*d.abs_error) + ", rel error " +
                       format_double(*d.rel_error);
            if (d.hidden) out += " [hidden]";
            out += "\n";
        }
        out += "\n";
    }

    out += "Caveat: " + report.caveat + "\n";
    return out;
}

namespace {

void expect(std::vector<std::string>& problems, bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
}

void check_signal_value(std::vector<std::string>& problems, const json& v,
                        const std::string& where) {
    if (!v.is_object() || !v.contains("kind") || !v["kind"].is_string()) {
        problems.push_back(where + ": signal value needs a string 'kind'");
        return;
    }
    std::string kind = v["kind"].get<std::string>();
    if (kind == "number") {
        expect(problems, v.contains("value") && v["value"].is_number(),
               where + ": number value needs numeric 'value'");
        if (v.contains("bound"))
            expect(problems,
                   v["bound"].is_array() && v["bound"].size() == 2 &&
                       v["bound"][0].is_number() && v["bound"][1].is_number(),
                   where + ": 'bound' must be [lo, hi]");
    } else if (kind == "clusters") {
        expect(problems, v.contains("clusters") && v["clusters"].is_array(),
               where + ": clusters value needs 'clusters' array");
    } else {
        expect(problems, kind == "unanswerable", where + ": unknown value kind '" + kind + "'");
    }
}

} // namespace

std::vector<std::string> validate_report_json(const json& j) {
    std::vector<std::string> problems;
    if (!j.is_object()) return {"report must be a JSON object"};

    expect(problems, j.contains("version") && j["version"] == 1, "report 'version' must be 1");
    expect(problems, j.contains("caveat") && j["caveat"].is_string(),
           "report needs string 'caveat'");

    if (!j.contains("outputs") || !j["outputs"].is_array()) {
        problems.push_back("report needs 'outputs' array");
    } else {
        static const std::vector<std::string> kinds{"sample", "summary", "model", "bundle"};
        static const std::vector<std::string> statuses{"revealed", "distorted", "hidden"};
        for (const auto& o : j["outputs"]) {
            expect(problems, o.is_object() && o.contains("id") && o["id"].is_string(),
                   "output needs string 'id'");
            expect(problems,
                   o.contains("kind") && o["kind"].is_string() &&
                       std::find(kinds.begin(), kinds.end(), o["kind"].get<std::string>()) !=
                           kinds.end(),
                   "output 'kind' must be sample|summary|model|bundle");
            expect(problems, o.contains("family") && o["family"].is_string(),
                   "output needs string 'family'");
            if (!o.contains("columns") || !o["columns"].is_array()) {
                problems.push_back("output needs 'columns' array");
                continue;
            }
            for (const auto& c : o["columns"]) {
                expect(problems, c.is_object() && c.contains("column") && c["column"].is_string(),
                       "column entry needs string 'column'");
                expect(problems,
                       c.contains("status") && c["status"].is_string() &&
                           std::find(statuses.begin(), statuses.end(),
                                     c["status"].get<std::string>()) != statuses.end(),
                       "column 'status' must be revealed|distorted|hidden");
                expect(problems, c.contains("causes") && c["causes"].is_array(),
                       "column entry needs 'causes' array");
            }
        }
    }

    if (!j.contains("findings") || !j["findings"].is_array()) {
        problems.push_back("report needs 'findings' array");
    } else {
        static const std::vector<std::string> categories{"Confuser", "Jumbler",
                                                         "HallucinatorRisk", "MisleaderRisk"};
        for (const auto& f : j["findings"]) {
            expect(problems,
                   f.is_object() && f.contains("category") && f["category"].is_string() &&
                       std::find(categories.begin(), categories.end(),
                                 f["category"].get<std::string>()) != categories.end(),
                   "finding 'category' must be a known category");
            expect(problems,
                   f.contains("rule") && f["rule"].is_string() &&
                       f["rule"].get<std::string>().size() == 2 &&
                       f["rule"].get<std::string>()[0] == 'R',
                   "finding 'rule' must be R1..R8");
            expect(problems, f.contains("node") && f["node"].is_string(),
                   "finding needs string 'node'");
            expect(problems, f.contains("subject") && f["subject"].is_array(),
                   "finding needs 'subject' array");
            expect(problems, f.contains("justification") && f["justification"].is_string(),
                   "finding needs string 'justification'");
        }
    }

    if (!j.contains("signals") || !j["signals"].is_array()) {
        problems.push_back("report needs 'signals' array");
    } else {
        for (const auto& s : j["signals"]) {
            expect(problems, s.is_object() && s.contains("signal") && s["signal"].is_string(),
                   "signal entry needs string 'signal'");
            expect(problems, s.contains("output") && s["output"].is_string(),
                   "signal entry needs string 'output'");
            expect(problems, s.contains("hidden") && s["hidden"].is_boolean(),
                   "signal entry needs boolean 'hidden'");
            if (s.contains("on_original"))
                check_signal_value(problems, s["on_original"], "on_original");
            else problems.push_back("signal entry needs 'on_original'");
            if (s.contains("on_disclosed"))
                check_signal_value(problems, s["on_disclosed"], "on_disclosed");
            else problems.push_back("signal entry needs 'on_disclosed'");
            bool both_numeric = s.contains("on_original") && s["on_original"].is_object() &&
                                s["on_original"].value("kind", "") == "number" &&
                                s.contains("on_disclosed") && s["on_disclosed"].is_object() &&
                                s["on_disclosed"].value("kind", "") == "number";
            expect(problems, s.contains("abs_error") == both_numeric,
                   "'abs_error' must be present iff both values are numeric");
            expect(problems, s.contains("rel_error") == both_numeric,
                   "'rel_error' must be present iff both values are numeric");
        }
    }
    return problems;
}

ordered_json sweep_to_json(const std::vector<SweepPoint>& points,
                           const std::vector<SweepParameter>& vary,
                           const std::vector<SweepObjective>& objectives) {
    ordered_json arr = ordered_json::array();
    for (const auto& pt : points) {
        ordered_json j;
        ordered_json params;
        for (std::size_t i = 0; i < vary.size(); ++i)
            params[vary[i].node_id + "." + vary[i].param] = pt.values[i];
        j["point"] = std::move(params);
        ordered_json ds = ordered_json::array();
        for (std::size_t oi = 0; oi < objectives.size(); ++oi) {
            ordered_json d = distortion_to_json(pt.distortions[oi]);
            d["goal"] =
                objectives[oi].goal == SweepObjective::Goal::Preserve ? "preserve" : "hide";
            ds.push_back(std::move(d));
        }
        j["objectives"] = std::move(ds);
        j["pareto"] = pt.pareto;
        arr.push_back(std::move(j));
    }
    return arr;
}

std::string sweep_to_csv(const std::vector<SweepPoint>& points,
                         const std::vector<SweepParameter>& vary,
                         const std::vector<SweepObjective>& objectives) {
    std::string out;
    for (const auto& v : vary) out += v.node_id + "." + v.param + ",";
    for (const auto& o : objectives) {
        std::string label = o.signal.name();
        for (char& c : label)
            if (c == ',') c = ';'; // keep the flat table unquoted
        out += label + ".error,";
        out += label + ".hidden,";
    }
    out += "pareto\n";
    for (const auto& pt : points) {
        for (double v : pt.values) out += format_double(v) + ",";
        for (const auto& d : pt.distortions) {
            out += (d.abs_error ? format_double(*d.abs_error) : "") + ",";
            out += (d.hidden ? "true" : "false") + std::string(",");
        }
        out += pt.pareto ? "true" : "false";
        out += '\n';
    }
    return out;
}

// --------------------------------------------------- representation files

std::string summary_to_csv(const SummaryRep& s) {
    // Reuses the CSV writer by laying the summary out as a plain table:
    // one column per key axis, one per statistic, one row per group.
    Table t;
    for (const auto& axis : s.key_axes)
        t.columns.push_back(Column{axis.name, ColumnKind::Nominal, {}, {}});
    for (const auto& name : s.stat_names)
        t.columns.push_back(Column{name, ColumnKind::Continuous, {}, {}});
    for (const auto& g : s.groups) {
        std::vector<Cell> row;
        for (const auto& k : g.keys) {
            if (std::holds_alternative<double>(k)) row.push_back(Cell{std::get<double>(k)});
            else row.push_back(Cell{group_key_label(k)});
        }
        for (const auto& st : g.stats) row.push_back(st);
        t.rows.push_back(std::move(row));
    }
    return write_csv(t);
}

nlohmann::ordered_json model_to_json(const ModelRep& m) {
    ordered_json j;
    j["evaluator"] = evaluator_kind_name(m.evaluator);
    ordered_json dom = ordered_json::array();
    for (const auto& a : m.domain) {
        ordered_json aj;
        aj["name"] = a.name;
        aj["lo"] = a.lo;
        aj["hi"] = a.hi;
        aj["grid_n"] = a.grid_n;
        dom.push_back(std::move(aj));
    }
    j["domain"] = std::move(dom);
    ordered_json params = ordered_json::object();
    for (std::size_t i = 0; i < m.params.size(); ++i)
        params[i < m.param_names.size() ? m.param_names[i] : "p" + std::to_string(i)] =
            m.params[i];
    j["params"] = std::move(params);
    j["grid"] = m.grid;
    if (m.attachment) {
        ordered_json att;
        ordered_json cols = ordered_json::array();
        for (const auto& c : m.attachment->columns) cols.push_back(c.name);
        att["columns"] = std::move(cols);
        ordered_json rows = ordered_json::array();
        for (const auto& r : m.attachment->rows) {
            ordered_json row = ordered_json::array();
            for (const auto& cell : r) {
                if (is_missing(cell)) row.push_back(nullptr);
                else if (is_number(cell)) row.push_back(as_number(cell));
                else row.push_back(as_text(cell));
            }
            rows.push_back(std::move(row));
        }
        att["rows"] = std::move(rows);
        j["attachment"] = std::move(att);
    }
    return j;
}

} // namespace aperture
