#include "crop/metrics.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace crop {

std::string format_double(double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buf, end);
}

namespace {

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw std::runtime_error("bad numeric field in metrics CSV: '" + std::string(text) + "'");
  return value;
}

}  // namespace

std::string metrics_to_csv(std::span<const MetricRecord> log) {
  std::string out = "step,seed,validation_return,evaluation_return,wall_s\n";
  for (const MetricRecord& rec : log) {
    out += std::to_string(rec.step);
    out += ',';
    out += std::to_string(rec.seed);
    out += ',';
    out += format_double(rec.validation_return);
    out += ',';
    out += format_double(rec.evaluation_return);
    out += ',';
    out += format_double(rec.wall_seconds);
    out += '\n';
  }
  return out;
}

void write_metrics(std::span<const MetricRecord> log, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open metrics file for writing: " + path);
  file << metrics_to_csv(log);
  if (!file) throw std::runtime_error("metrics write failed: " + path);
}

std::vector<MetricRecord> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "step,seed,validation_return,evaluation_return,wall_s")
    throw std::runtime_error("metrics CSV header mismatch");

  std::vector<MetricRecord> log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream row(line);
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 5) throw std::runtime_error("metrics CSV row has wrong arity");
    MetricRecord rec;
    rec.step = std::stol(fields[0]);
    rec.seed = std::stoull(fields[1]);
    rec.validation_return = parse_double(fields[2]);
    rec.evaluation_return = parse_double(fields[3]);
    rec.wall_seconds = parse_double(fields[4]);
    log.push_back(rec);
  }
  return log;
}

std::vector<MetricRecord> read_metrics(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open metrics file: " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_metrics_csv(buffer.str());
}

}  // namespace crop
