#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "glyphforge/knowledge.hpp"
#include "glyphforge/recognition.hpp"

namespace glyphforge {

// Process exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitError = 1,
    kExitUsage = 2,
    kExitUnknown = 3,
    kExitEmptyKb = 4,
};

struct LabelEval {
    std::string label;
    std::int64_t taught = 0;
    std::size_t tested = 0;
    std::size_t correct = 0;
    std::size_t unknown = 0;
    std::size_t misclassified = 0;
};

struct EvalReport {
    std::vector<LabelEval> per_label;
    std::size_t tested = 0;
    std::size_t correct = 0;
    std::size_t unknown = 0;
    std::size_t misclassified = 0;
    // (expected, predicted) -> count, for Match decisions on the wrong label.
    std::map<std::pair<std::string, std::string>, std::size_t> confusion;
    // Best quotient of every decision that had one. The median is the lower median.
    std::optional<Quotient> q_min, q_median, q_max;
    std::vector<std::string> warnings;

    // correct / tested, or nullopt when nothing was tested.
    std::optional<double> accuracy() const;
};

// Classifies every file under corpus_dir/<label>/ (sorted traversal).
// Stray top-level files and directories that are not valid labels are skipped
// with a warning. Throws IoError/ParseError on unreadable content.
EvalReport evaluate(const KnowledgeBase& kb, const std::filesystem::path& corpus_dir, const Quotient& threshold,
                    const DigitizeOptions& options = {});

nlohmann::json eval_to_json(const EvalReport& report);
void print_eval(std::ostream& out, const EvalReport& report);

// Header line and integer rows, plus an optional character-ramp heat map
// ('-' most negative, '·' zero, '#' most positive).
void print_weights(std::ostream& out, const Label& label, const WeightMatrix& weights, bool heat);

// Entry point of the `glyphforge` executable. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace glyphforge
