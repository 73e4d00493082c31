#include "mpcl/io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mpcl/errors.hpp"
#include "mpcl/line_class.hpp"
#include "mpcl/rs_pointer.hpp"

namespace mpcl {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::usage: return "usage";
        case ErrorCode::schema: return "schema";
        case ErrorCode::budget: return "budget";
        case ErrorCode::parameter: return "parameter";
        case ErrorCode::empty_sample: return "empty_sample";
        case ErrorCode::invalid_distribution: return "invalid_distribution";
        case ErrorCode::length_mismatch: return "length_mismatch";
        case ErrorCode::malformed: return "malformed";
        case ErrorCode::quantile_sample_depleted: return "quantile_sample_depleted";
        case ErrorCode::rejection_budget_exceeded: return "rejection_budget_exceeded";
        case ErrorCode::access_violation: return "access_violation";
        case ErrorCode::io: return "io";
    }
    return "unknown";
}

namespace {

// Reads a required field, turning type and presence errors into schema errors.
template <typename T>
T field(const Json& j, const char* name) {
    require(j.is_object() && j.contains(name), ErrorCode::schema, std::string("missing field '") + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::schema, std::string("field '") + name + "': " + e.what());
    }
}

PcClassSpec pc_spec_from_json(const Json& j) {
    return PcClassSpec::make(field<unsigned>(j, "c"), field<std::uint64_t>(j, "k"), field<std::uint64_t>(j, "d"),
                             field<std::uint64_t>(j, "b"));
}

Json pc_spec_to_json(const PcClassSpec& s) {
    return {{"kind", "pointer_chasing"}, {"c", s.c}, {"k", s.k}, {"d", s.d}, {"b", s.b}};
}

LineClassSpec line_spec_from_json(const Json& j) {
    return {field<std::uint64_t>(j, "n"), field<std::uint64_t>(j, "d"), field<std::uint64_t>(j, "p")};
}

}  // namespace

Json hypothesis_to_json(const Hypothesis& h) {
    require(static_cast<bool>(h), ErrorCode::malformed, "cannot serialize an empty hypothesis");
    if (const auto* t = h.as<TableHypothesis>()) {
        return {{"kind", "table"}, {"labels", std::vector<int>(t->labels().begin(), t->labels().end())}};
    }
    if (const auto* l = h.as<LineHypothesis>()) {
        Json lines = Json::array();
        for (const auto& a : l->lines()) lines.push_back({a.slope, a.intercept});
        return {{"kind", "line"},
                {"n", l->spec().n},
                {"d", l->spec().d},
                {"p", l->spec().p},
                {"block", l->block()},
                {"lines", lines}};
    }
    if (const auto* pc = h.as<PcHypothesis>()) {
        Json out = pc_spec_to_json(pc->spec());
        out["params"] = pc->params();
        return out;
    }
    if (const auto* m = h.as<MajorityHypothesis>()) {
        Json voters = Json::array();
        for (const auto& v : m->voters()) voters.push_back(hypothesis_to_json(v));
        return {{"kind", "majority"}, {"voters", voters}};
    }
    fail(ErrorCode::malformed, "unknown hypothesis model");
}

Hypothesis hypothesis_from_json(const Json& j) {
    const auto kind = field<std::string>(j, "kind");
    if (kind == "table") {
        std::vector<std::uint8_t> labels;
        for (int v : field<std::vector<int>>(j, "labels")) {
            require(v == 0 || v == 1, ErrorCode::schema, "table labels must be 0 or 1");
            labels.push_back(static_cast<std::uint8_t>(v));
        }
        return make_table(std::move(labels));
    }
    if (kind == "line") {
        std::vector<LineParams> lines;
        for (const auto& pair : field<std::vector<std::vector<std::uint64_t>>>(j, "lines")) {
            require(pair.size() == 2, ErrorCode::schema, "each line is [slope, intercept]");
            lines.push_back({pair[0], pair[1]});
        }
        return make_line_hypothesis(line_spec_from_json(j), field<std::uint64_t>(j, "block"), std::move(lines));
    }
    if (kind == "pointer_chasing") {
        return build_pc_hypothesis(pc_spec_from_json(j), field<std::vector<std::uint64_t>>(j, "params"));
    }
    if (kind == "majority") {
        std::vector<Hypothesis> voters;
        for (const auto& v : field<Json>(j, "voters")) voters.push_back(hypothesis_from_json(v));
        return make_majority(std::move(voters));
    }
    fail(ErrorCode::schema, "unknown hypothesis kind '" + kind + "'");
}

Json task_to_json(const TaskDistribution& task) {
    Json atoms = Json::array();
    for (const auto& a : task.atoms()) atoms.push_back({a.point.value, a.label, a.mass});
    return atoms;
}

TaskDistribution task_from_json(const Json& j) {
    require(j.is_array(), ErrorCode::schema, "a task is an array of [point, label, mass] triples");
    std::vector<Atom> atoms;
    atoms.reserve(j.size());
    for (const auto& t : j) {
        require(t.is_array() && t.size() == 3 && t[0].is_number_unsigned() && t[1].is_number_unsigned() &&
                    t[2].is_number(),
                ErrorCode::schema, "task atom must be [point, label, mass]");
        const auto label = t[1].get<std::uint64_t>();
        require(label <= 1, ErrorCode::schema, "label must be 0 or 1");
        atoms.push_back({PointId{t[0].get<std::uint64_t>()}, static_cast<std::uint8_t>(label), t[2].get<double>()});
    }
    return TaskDistribution(std::move(atoms));
}

std::uint64_t Instance::universe_size() const {
    const auto kind = field<std::string>(class_spec, "kind");
    if (kind == "line") return line_spec_from_json(class_spec).universe_size();
    if (kind == "pointer_chasing") return pc_spec_from_json(class_spec).universe_size();
    if (kind == "threshold" || kind == "tables" || kind == "constants") {
        return field<std::uint64_t>(class_spec, "size");
    }
    fail(ErrorCode::schema, "unknown class kind '" + kind + "'");
}

std::unique_ptr<HypothesisClass> Instance::make_class() const {
    const auto kind = field<std::string>(class_spec, "kind");
    if (kind == "line") return std::make_unique<LineClass>(line_spec_from_json(class_spec));
    if (kind == "pointer_chasing") return std::make_unique<PcClass>(pc_spec_from_json(class_spec));
    const auto size = field<std::uint64_t>(class_spec, "size");
    if (kind == "threshold") return std::make_unique<ExplicitClass>(threshold_class(size));
    if (kind == "tables") return std::make_unique<ExplicitClass>(all_tables_class(size));
    if (kind == "constants") return std::make_unique<ExplicitClass>(constants_class(size));
    fail(ErrorCode::schema, "unknown class kind '" + kind + "'");
}

Json instance_to_json(const Instance& inst) {
    Json tasks = Json::array();
    for (const auto& t : inst.tasks) tasks.push_back(task_to_json(t));
    Json out = {{"format", "mpcl-instance"},
                {"version", 1},
                {"universe",
                 {{"size", inst.universe_size()}, {"description_bits", inst.description_bits()}, {"class", inst.class_spec}}},
                {"tasks", tasks}};
    out[inst.class_spec.value("kind", "") == "pointer_chasing" ? "pc_meta" : "meta"] = inst.meta;
    if (inst.witness) out["witness"] = hypothesis_to_json(*inst.witness);
    return out;
}

Instance instance_from_json(const Json& j) {
    require(field<std::string>(j, "format") == "mpcl-instance", ErrorCode::schema, "not an instance file");
    require(field<int>(j, "version") == 1, ErrorCode::schema, "unsupported instance version");
    Instance inst;
    inst.class_spec = field<Json>(field<Json>(j, "universe"), "class");
    for (const auto& t : field<Json>(j, "tasks")) inst.tasks.push_back(task_from_json(t));
    require(!inst.tasks.empty(), ErrorCode::schema, "instance has no tasks");
    if (j.contains("witness")) inst.witness = hypothesis_from_json(j.at("witness"));
    if (j.contains("meta")) inst.meta = j.at("meta");
    if (j.contains("pc_meta")) inst.meta = j.at("pc_meta");
    const auto size = inst.universe_size();
    for (const auto& t : inst.tasks) {
        for (const auto& a : t.atoms()) {
            require(a.point.value < size, ErrorCode::schema, "task point outside the universe");
        }
    }
    return inst;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::io, "cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::schema, path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorCode::io, "cannot write " + path);
    out << text;
    require(static_cast<bool>(out), ErrorCode::io, "write failed for " + path);
}

void save_instance(const Instance& inst, const std::string& path) {
    write_text_file(path, instance_to_json(inst).dump(1) + "\n");
}

Instance load_instance(const std::string& path) { return instance_from_json(read_json_file(path)); }

Json params_to_json(const LearnerParams& params) {
    const auto& k = params.constants();
    return {{"k", params.k()},
            {"d", params.d()},
            {"b", params.b()},
            {"c", params.c()},
            {"epsilon", params.epsilon()},
            {"delta", params.delta()},
            {"constants", {{"c_n", k.c_n}, {"c_m1", k.c_m1}, {"c_m2", k.c_m2}, {"c_r", k.c_r}}}};
}

LearnerParams params_from_json(const Json& j) {
    LearnerConstants constants;
    if (j.contains("constants")) {
        const auto& k = j.at("constants");
        constants.c_n = k.value("c_n", constants.c_n);
        constants.c_m1 = k.value("c_m1", constants.c_m1);
        constants.c_m2 = k.value("c_m2", constants.c_m2);
        constants.c_r = k.value("c_r", constants.c_r);
    }
    return LearnerParams(field<unsigned>(j, "k"), field<unsigned>(j, "d"), field<unsigned>(j, "b"),
                         field<unsigned>(j, "c"), field<double>(j, "epsilon"), field<double>(j, "delta"), constants);
}

Json thresholds_to_json(const Thresholds& thr) {
    Json out = Json::array();
    for (const auto& key : thr) out.push_back({key.miss, key.point.value, key.tag});
    return out;
}

Thresholds thresholds_from_json(const Json& j) {
    require(j.is_array(), ErrorCode::schema, "thresholds must be an array");
    Thresholds out;
    for (const auto& e : j) {
        require(e.is_array() && e.size() == 3, ErrorCode::schema, "threshold must be [miss, point, tag]");
        out.push_back({e[0].get<std::uint32_t>(), PointId{e[1].get<std::uint64_t>()}, e[2].get<std::uint64_t>()});
    }
    return out;
}

void write_capture(std::ostream& out, const OracleSnapshot& snap, std::uint64_t seed) {
    Json tasks = Json::array();
    for (const auto& t : snap.tasks) tasks.push_back(task_to_json(t));
    Json hyps = Json::array();
    for (const auto& h : snap.hypotheses) hyps.push_back(hypothesis_to_json(h));
    Json thresholds = Json::array();
    for (const auto& pass : snap.thresholds) {
        Json row = Json::array();
        for (const auto& thr : pass) row.push_back(thresholds_to_json(thr));
        thresholds.push_back(row);
    }
    Json extra = Json::array();
    for (const auto& thr : snap.extra_thresholds) extra.push_back(thresholds_to_json(thr));
    const Json body = {{"seed", seed},         {"params", params_to_json(snap.params)},
                       {"tasks", tasks},       {"hypotheses", hyps},
                       {"thresholds", thresholds}, {"extra_thresholds", extra},
                       {"w_hat", snap.w_hat}};
    out << kCaptureHeader << '\n' << body.dump() << '\n';
}

OracleSnapshot read_capture(std::istream& in, std::uint64_t* seed) {
    std::string header;
    std::getline(in, header);
    require(header == kCaptureHeader, ErrorCode::schema, "capture must start with '" + std::string(kCaptureHeader) + "'");
    Json body;
    try {
        body = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::schema, std::string("capture body: ") + e.what());
    }
    std::vector<TaskDistribution> tasks;
    for (const auto& t : field<Json>(body, "tasks")) tasks.push_back(task_from_json(t));
    OracleSnapshot snap(std::move(tasks), params_from_json(field<Json>(body, "params")));
    for (const auto& h : field<Json>(body, "hypotheses")) snap.hypotheses.push_back(hypothesis_from_json(h));
    for (const auto& pass : field<Json>(body, "thresholds")) {
        std::vector<Thresholds> row;
        for (const auto& thr : pass) row.push_back(thresholds_from_json(thr));
        require(row.size() == snap.k(), ErrorCode::schema, "one threshold list per task and pass");
        snap.thresholds.push_back(std::move(row));
    }
    for (const auto& thr : field<Json>(body, "extra_thresholds")) snap.extra_thresholds.push_back(thresholds_from_json(thr));
    snap.w_hat = field<std::vector<std::vector<double>>>(body, "w_hat");
    require(snap.hypotheses.size() == snap.thresholds.size() && snap.w_hat.size() == snap.thresholds.size(),
            ErrorCode::schema, "capture pass counts disagree");
    if (seed) *seed = field<std::uint64_t>(body, "seed");
    return snap;
}

void save_capture(const OracleSnapshot& snap, std::uint64_t seed, const std::string& path) {
    std::ostringstream out;
    write_capture(out, snap, seed);
    write_text_file(path, out.str());
}

OracleSnapshot load_capture(const std::string& path, std::uint64_t* seed) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::io, "cannot open " + path);
    return read_capture(in, seed);
}

void write_loss_csv(std::ostream& out, std::span<const double> losses) {
    out << "task_id,loss\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < losses.size(); ++i) out << i + 1 << ',' << losses[i] << '\n';
}

void write_report_csv(std::ostream& out, std::span<const ReportRow> rows) {
    out << "pass,stage,w_hat,peak_bits,samples_drawn,rejections\n";
    out << std::setprecision(17);
    for (const auto& r : rows) {
        out << r.pass << ',' << r.stage << ',' << r.w_hat << ',' << r.peak_bits << ',' << r.samples_drawn << ','
            << r.rejections << '\n';
    }
}

}  // namespace mpcl
