#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpcl/hypothesis_class.hpp"
#include "mpcl/learner/learner.hpp"
#include "mpcl/oracle.hpp"

namespace mpcl {

using Json = nlohmann::json;

// Universe + tasks + optional witness, plus the class that labels them.
struct Instance {
    // {"kind": "line"|"pointer_chasing"|"threshold"|"tables", ...}
    Json class_spec;
    std::vector<TaskDistribution> tasks;
    std::optional<Hypothesis> witness;
    Json meta = Json::object();

    std::uint64_t universe_size() const;
    unsigned description_bits() const { return mpcl::description_bits(universe_size()); }
    std::unique_ptr<HypothesisClass> make_class() const;
};

Json hypothesis_to_json(const Hypothesis& h);
Hypothesis hypothesis_from_json(const Json& j);

Json task_to_json(const TaskDistribution& task);
TaskDistribution task_from_json(const Json& j);

Json instance_to_json(const Instance& inst);
Instance instance_from_json(const Json& j);

void save_instance(const Instance& inst, const std::string& path);
Instance load_instance(const std::string& path);

Json params_to_json(const LearnerParams& params);
LearnerParams params_from_json(const Json& j);

Json thresholds_to_json(const Thresholds& thr);
Thresholds thresholds_from_json(const Json& j);

// Versioned run capture consumed by `verify`.
inline constexpr const char* kCaptureHeader = "mpcl-capture 1";

void write_capture(std::ostream& out, const OracleSnapshot& snap, std::uint64_t seed);
OracleSnapshot read_capture(std::istream& in, std::uint64_t* seed = nullptr);
void save_capture(const OracleSnapshot& snap, std::uint64_t seed, const std::string& path);
OracleSnapshot load_capture(const std::string& path, std::uint64_t* seed = nullptr);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// CSV writers; each emits its header line first.
void write_loss_csv(std::ostream& out, std::span<const double> losses);
void write_report_csv(std::ostream& out, std::span<const ReportRow> rows);

}  // namespace mpcl
