#pragma once

#include "pchoice/choice_core.hpp"
#include "pchoice/embed_net.hpp"
#include "pchoice/evaluation.hpp"
#include "pchoice/training.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pchoice {

/// Malformed or unsupported persisted data; maps to exit code 2 in the CLI.
class DataFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

std::uint64_t fnv1a64(std::string_view bytes);

/// Fingerprint of a dataset's canonical serialized byte stream, as a
/// 16-digit hex string.
std::string dataset_fingerprint(const Dataset& data);

/// Writes content to a temporary sibling and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// --- dataset files: JSON Lines, one header line then one object per line ---

inline constexpr std::string_view kDatasetFormatTag = "pareto-choice/dataset";
inline constexpr int kDatasetFormatVersion = 1;

std::string serialize_dataset(const Dataset& data);
void save_dataset(const std::filesystem::path& path, const Dataset& data);

/// Throws DataFormatError with the offending line number on malformed input.
Dataset load_dataset(const std::filesystem::path& path);

// --- model files: one JSON document ---

inline constexpr std::string_view kModelFormatTag = "pareto-choice/model";
inline constexpr int kModelFormatVersion = 1;

struct ModelFile {
  NetworkParams params;
  TrainConfig train_config;
  std::string dataset_fingerprint;
};

std::string serialize_model(const ModelFile& model);
void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

// --- CSV reports ---

/// Columns: epoch,loss_total,loss_po,loss_dom,loss_mds,loss_l2,val_a_mean.
std::string training_log_csv(const TrainReport& report);

inline constexpr std::string_view kEvalCsvHeader =
    "problem,split,repetition,n_tasks,mean_a_mean,std_a_mean,tp,fp,tn,fn";

std::string eval_report_csv(const std::vector<EvalReport>& reports);

// --- SVG bar chart ---

struct BarItem {
  std::string label;
  std::string arm;  // empty for single-arm charts
  double mean = 0.0;
  double stddev = 0.0;
};

/// Fixed chart geometry so the reference line position is testable.
struct ChartLayout {
  double width = 760.0;
  double height = 360.0;
  double margin_left = 48.0;
  double margin_right = 16.0;
  double margin_top = 24.0;
  double margin_bottom = 56.0;

  double plot_height() const { return height - margin_top - margin_bottom; }
  double plot_width() const { return width - margin_left - margin_right; }
  /// Vertical pixel position of an A-mean value; the axis is fixed to [0,1].
  double y_of(double value) const { return margin_top + (1.0 - value) * plot_height(); }
};

/// Bars grouped by label with +/- one standard deviation error sticks and a
/// dashed reference line at the 0.5 random baseline.
std::string render_bar_chart(const std::vector<BarItem>& items, const std::string& title,
                             const ChartLayout& layout = {});

}  // namespace pchoice
