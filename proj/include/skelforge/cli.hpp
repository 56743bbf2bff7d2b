#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace skelforge {

enum class StepSelection { Full, Auto };

struct JobConfig {
    std::filesystem::path input;
    std::filesystem::path output;
    std::filesystem::path gt;          // eval: ground-truth directory
    std::filesystem::path similarity;  // eval: optional similarity CSV
    std::size_t k_min = 4;
    std::size_t k_max = 30;
    bool fill_holes = true;
    std::optional<double> tolerance;   // eval: default scales with image size
    std::size_t workers = 1;
    bool intersect = false;
    std::size_t per_class = 0;         // eval: 0 infers from labels
    StepSelection select = StepSelection::Full;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitItemFailure = 1;
inline constexpr int kExitConfig = 2;

/// Lowest SS a ladder step needs for automatic selection.
inline constexpr double kAutoMinSimplicity = 0.05;

/// Per item: ladder.json plus a GT record of the selected step under
/// output/<id>/; summary.json lists RE/SS per item.
int cmd_skeletonize(const JobConfig& config);

/// Mean RE and SS of every GT record below input, grouped by dataset
/// (the directory holding the record directories). Writes report.csv.
int cmd_report(const JobConfig& config);

/// AEP and F1 of predicted skeletons against GT; BES if a similarity CSV is given.
int cmd_eval(const JobConfig& config);

/// Consensus over the GT records found in input's subdirectories.
int cmd_integrate(const JobConfig& config);

/// RE/SS curve of a ladder (or a session's history) as a PNG.
int cmd_plot(const JobConfig& config);

}  // namespace skelforge
