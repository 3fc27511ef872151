#pragma once

// Plain-text file formats. Every format starts with a versioned header line;
// writers are canonical (shortest round-trip numbers, fixed key order), so
// write(parse(text)) == text for any text a writer produced.
//
// Instance:
//   oclust-instance 1
//   k=2
//   m=1
//   z=1
//   euclidean 2                 | matrix 4
//   0,both,0.5,1                | 0,client
//   1,client,3,-2               | 1,facility,3
//   ...                         | 2,both,4,5      (distances to ids 0..i-1)
// Roles are client, facility, both or none; ids run 0..n-1 in order.
//
// Colors (colors are 1-based in the file):
//   oclust-colors 1
//   budgets=2,1
//   0,1
//   3,2
//
// Matroid:
//   oclust-matroid 1
//   kind=uniform     rank=2      ground=0,1,2
//   kind=partition   part=1:0,1,2   part=2:3,4
//   kind=explicit    ground=0,1,2   set=0,1   set=2
// (one key per line).
//
// Coreset dump:
//   oclust-coreset 1
//   seed=..  s=..  R=..  phi=..  tau=..  baseline=ids   (one key per line)
//   i,j,point_id,weight[,color]

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "oclust/coreset.hpp"
#include "oclust/extensions.hpp"
#include "oclust/matroid.hpp"
#include "oclust/metric.hpp"

namespace oclust {

/// Thrown on malformed input; the message names the offending line.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

std::string write_instance(const MetricInstance& inst);
MetricInstance parse_instance(std::string_view text);

struct ColorFile {
  std::vector<std::size_t> budgets;                         // index t is color t + 1 in the file
  std::vector<std::pair<PointId, std::uint32_t>> colors;    // 0-based colors
};

std::string write_colors(const ColorFile& colors);
ColorFile parse_colors(std::string_view text);
ColorFile color_file(const ColorfulInstance& inst);
/// Attaches colors to `base`; every client needs exactly one color.
ColorfulInstance attach_colors(const MetricInstance& base, const ColorFile& colors);

std::string write_matroid(const Matroid& matroid);
std::shared_ptr<const Matroid> parse_matroid(std::string_view text);

struct CoresetDump {
  std::uint64_t seed = 0;
  std::uint64_t sample_size = 0;
  double radius = 0.0;
  std::size_t phi = 0;
  double tau = 1.0;
  std::vector<PointId> baseline;
  std::vector<CoresetEntry> entries;
};

CoresetDump make_dump(const RingPartition& rings, const WeightedCoreset& coreset);
std::string write_coreset(const CoresetDump& dump);
CoresetDump parse_coreset(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace oclust
