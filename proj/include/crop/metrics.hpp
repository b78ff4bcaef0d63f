#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace crop {

// One periodic measurement during training. Validation runs in the training
// configuration(s), evaluation in the unseen counterpart.
struct MetricRecord {
  long step = 0;
  uint64_t seed = 0;
  double validation_return = 0.0;
  double evaluation_return = 0.0;
  double wall_seconds = 0.0;

  bool operator==(const MetricRecord&) const = default;
};

// Shortest decimal form that round-trips the exact double.
std::string format_double(double value);

// CSV with the fixed header step,seed,validation_return,evaluation_return,wall_s.
std::string metrics_to_csv(std::span<const MetricRecord> log);
void write_metrics(std::span<const MetricRecord> log, const std::string& path);
std::vector<MetricRecord> parse_metrics_csv(const std::string& text);
std::vector<MetricRecord> read_metrics(const std::string& path);

}  // namespace crop
