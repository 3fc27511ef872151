#include "oclust/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace oclust {

namespace {

constexpr std::string_view kInstanceHeader = "oclust-instance 1";
constexpr std::string_view kColorsHeader = "oclust-colors 1";
constexpr std::string_view kMatroidHeader = "oclust-matroid 1";
constexpr std::string_view kCoresetHeader = "oclust-coreset 1";

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  std::size_t line_number() const { return line_; }

  std::string_view next() {
    if (done()) fail("unexpected end of input");
    const std::size_t end = text_.find('\n', pos_);
    std::string_view line = text_.substr(pos_, end == std::string_view::npos ? std::string_view::npos : end - pos_);
    pos_ = end == std::string_view::npos ? text_.size() : end + 1;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError("line " + std::to_string(line_) + ": " + message);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = text.find(sep, start);
    if (at == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, at - start));
    start = at + 1;
  }
}

template <class T>
T parse_integer(const LineReader& in, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    in.fail("expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

double parse_double(const LineReader& in, std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    in.fail("expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

std::string_view expect_key(LineReader& in, std::string_view key) {
  const std::string_view line = in.next();
  if (line.size() <= key.size() || line.substr(0, key.size()) != key || line[key.size()] != '=') {
    in.fail("expected '" + std::string(key) + "='");
  }
  return line.substr(key.size() + 1);
}

void expect_header(LineReader& in, std::string_view header) {
  if (in.next() != header) in.fail("expected header '" + std::string(header) + "'");
}

std::vector<PointId> parse_ids(const LineReader& in, std::string_view text) {
  std::vector<PointId> out;
  if (text.empty()) return out;
  for (auto field : split(text, ',')) out.push_back(point_id(parse_integer<std::uint32_t>(in, field)));
  return out;
}

std::string join_ids(std::span<const PointId> ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(index_of(ids[i]));
  }
  return out;
}

}  // namespace

std::string format_number(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buffer, ptr);
}

std::string write_instance(const MetricInstance& inst) {
  inst.validate();
  const auto& metric = inst.oracle();
  const std::size_t n = metric.size();
  std::vector<char> is_client(n, 0);
  std::vector<char> is_facility(n, 0);
  for (PointId p : inst.clients) is_client[index_of(p)] = 1;
  for (PointId p : inst.facilities) is_facility[index_of(p)] = 1;
  auto role = [&](std::size_t i) -> std::string_view {
    if (is_client[i] && is_facility[i]) return "both";
    if (is_client[i]) return "client";
    if (is_facility[i]) return "facility";
    return "none";
  };

  std::ostringstream out;
  out << kInstanceHeader << '\n';
  out << "k=" << inst.k << '\n' << "m=" << inst.m << '\n' << "z=" << format_number(inst.z) << '\n';
  if (const auto* euclid = dynamic_cast<const EuclideanDistance*>(&metric)) {
    out << "euclidean " << euclid->dimension() << '\n';
    for (std::size_t i = 0; i < n; ++i) {
      out << i << ',' << role(i);
      for (double c : euclid->coordinates(point_id(i))) out << ',' << format_number(c);
      out << '\n';
    }
  } else {
    out << "matrix " << n << '\n';
    for (std::size_t i = 0; i < n; ++i) {
      out << i << ',' << role(i);
      for (std::size_t j = 0; j < i; ++j) out << ',' << format_number(metric.distance(point_id(i), point_id(j)));
      out << '\n';
    }
  }
  return out.str();
}

MetricInstance parse_instance(std::string_view text) {
  LineReader in(text);
  expect_header(in, kInstanceHeader);
  MetricInstance inst;
  inst.k = parse_integer<std::size_t>(in, expect_key(in, "k"));
  inst.m = parse_integer<std::size_t>(in, expect_key(in, "m"));
  inst.z = parse_double(in, expect_key(in, "z"));

  const std::string_view kind_line = in.next();
  const auto kind = split(kind_line, ' ');
  if (kind.size() != 2 || (kind[0] != "euclidean" && kind[0] != "matrix")) {
    in.fail("expected 'euclidean <dimension>' or 'matrix <n>'");
  }
  const bool euclidean = kind[0] == "euclidean";
  const std::size_t count = parse_integer<std::size_t>(in, kind[1]);

  std::vector<double> values;
  std::size_t i = 0;
  while (!in.done()) {
    const std::string_view line = in.next();
    if (line.empty()) {
      if (in.done()) break;
      in.fail("empty line");
    }
    const auto fields = split(line, ',');
    if (fields.size() < 2) in.fail("expected 'id,role,...'");
    if (parse_integer<std::size_t>(in, fields[0]) != i) in.fail("ids must run 0..n-1 in order");
    const std::string_view role = fields[1];
    if (role == "client" || role == "both") inst.clients.push_back(point_id(i));
    if (role == "facility" || role == "both") inst.facilities.push_back(point_id(i));
    if (role != "client" && role != "facility" && role != "both" && role != "none") in.fail("unknown role");
    const std::size_t expected = euclidean ? count : i;
    if (fields.size() != 2 + expected) in.fail("expected " + std::to_string(expected) + " numbers");
    for (std::size_t f = 2; f < fields.size(); ++f) values.push_back(parse_double(in, fields[f]));
    ++i;
  }
  try {
    if (euclidean) {
      if (count == 0) in.fail("dimension must be positive");
      inst.metric = std::make_shared<EuclideanDistance>(count, std::move(values));
    } else {
      if (i != count) in.fail("matrix declares " + std::to_string(count) + " points, found " + std::to_string(i));
      inst.metric = std::make_shared<MatrixDistance>(MatrixDistance::from_lower_triangle(count, values));
    }
    inst.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  return inst;
}

std::string write_colors(const ColorFile& colors) {
  std::ostringstream out;
  out << kColorsHeader << '\n' << "budgets=";
  for (std::size_t t = 0; t < colors.budgets.size(); ++t) out << (t > 0 ? "," : "") << colors.budgets[t];
  out << '\n';
  for (const auto& [p, c] : colors.colors) out << index_of(p) << ',' << (c + 1) << '\n';
  return out.str();
}

ColorFile parse_colors(std::string_view text) {
  LineReader in(text);
  expect_header(in, kColorsHeader);
  ColorFile out;
  const auto budgets = expect_key(in, "budgets");
  if (budgets.empty()) in.fail("at least one budget is required");
  for (auto field : split(budgets, ',')) out.budgets.push_back(parse_integer<std::size_t>(in, field));
  while (!in.done()) {
    const std::string_view line = in.next();
    if (line.empty() && in.done()) break;
    const auto fields = split(line, ',');
    if (fields.size() != 2) in.fail("expected 'point_id,color'");
    const auto color = parse_integer<std::uint32_t>(in, fields[1]);
    if (color == 0 || color > out.budgets.size()) in.fail("color outside 1.." + std::to_string(out.budgets.size()));
    out.colors.emplace_back(point_id(parse_integer<std::uint32_t>(in, fields[0])), color - 1);
  }
  return out;
}

ColorFile color_file(const ColorfulInstance& inst) {
  ColorFile out;
  out.budgets = inst.budgets;
  for (std::size_t i = 0; i < inst.base.clients.size(); ++i) out.colors.emplace_back(inst.base.clients[i], inst.colors[i]);
  return out;
}

ColorfulInstance attach_colors(const MetricInstance& base, const ColorFile& colors) {
  std::map<std::uint32_t, std::uint32_t> color_of;
  for (const auto& [p, c] : colors.colors) {
    if (!color_of.emplace(index_of(p), c).second) {
      throw std::invalid_argument("point " + std::to_string(index_of(p)) + " has two colors");
    }
  }
  ColorfulInstance out;
  out.base = base;
  out.budgets = colors.budgets;
  for (PointId p : base.clients) {
    const auto it = color_of.find(index_of(p));
    if (it == color_of.end()) throw std::invalid_argument("client " + std::to_string(index_of(p)) + " has no color");
    out.colors.push_back(it->second);
  }
  if (color_of.size() != base.clients.size()) throw std::invalid_argument("colors given for non-clients");
  std::size_t total = 0;
  for (std::size_t b : colors.budgets) total += b;
  out.base.m = total;
  out.validate();
  return out;
}

std::string write_matroid(const Matroid& matroid) {
  std::ostringstream out;
  out << kMatroidHeader << '\n';
  if (const auto* u = dynamic_cast<const UniformMatroid*>(&matroid)) {
    out << "kind=uniform\nrank=" << u->capacity() << "\nground=" << join_ids(u->ground_set()) << '\n';
  } else if (const auto* p = dynamic_cast<const PartitionMatroid*>(&matroid)) {
    out << "kind=partition\n";
    for (const auto& part : p->parts()) out << "part=" << part.capacity << ':' << join_ids(part.members) << '\n';
  } else if (const auto* e = dynamic_cast<const ExplicitMatroid*>(&matroid)) {
    out << "kind=explicit\nground=" << join_ids(e->ground_set()) << '\n';
    for (const auto& set : e->listed_sets()) out << "set=" << join_ids(set) << '\n';
  } else {
    throw std::invalid_argument("only uniform, partition and explicit matroids have a file form");
  }
  return out.str();
}

std::shared_ptr<const Matroid> parse_matroid(std::string_view text) {
  LineReader in(text);
  expect_header(in, kMatroidHeader);
  const std::string_view kind = expect_key(in, "kind");
  try {
    if (kind == "uniform") {
      const auto rank = parse_integer<std::size_t>(in, expect_key(in, "rank"));
      auto ground = parse_ids(in, expect_key(in, "ground"));
      return std::make_shared<UniformMatroid>(std::move(ground), rank);
    }
    if (kind == "partition") {
      std::vector<PartitionMatroid::Part> parts;
      while (!in.done()) {
        const std::string_view value = expect_key(in, "part");
        const std::size_t colon = value.find(':');
        if (colon == std::string_view::npos) in.fail("expected 'part=capacity:ids'");
        PartitionMatroid::Part part;
        part.capacity = parse_integer<std::size_t>(in, value.substr(0, colon));
        part.members = parse_ids(in, value.substr(colon + 1));
        parts.push_back(std::move(part));
      }
      return std::make_shared<PartitionMatroid>(std::move(parts));
    }
    if (kind == "explicit") {
      auto ground = parse_ids(in, expect_key(in, "ground"));
      std::vector<std::vector<PointId>> sets;
      while (!in.done()) sets.push_back(parse_ids(in, expect_key(in, "set")));
      return std::make_shared<ExplicitMatroid>(std::move(ground), std::move(sets));
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  in.fail("unknown matroid kind '" + std::string(kind) + "'");
}

CoresetDump make_dump(const RingPartition& rings, const WeightedCoreset& coreset) {
  CoresetDump dump;
  dump.seed = coreset.seed;
  dump.sample_size = coreset.sample_size;
  dump.radius = rings.radius;
  dump.phi = rings.phi;
  dump.tau = rings.tau;
  dump.baseline = rings.baseline;
  dump.entries = coreset.entries;
  return dump;
}

std::string write_coreset(const CoresetDump& dump) {
  std::ostringstream out;
  out << kCoresetHeader << '\n';
  out << "seed=" << dump.seed << "\ns=" << dump.sample_size << "\nR=" << format_number(dump.radius)
      << "\nphi=" << dump.phi << "\ntau=" << format_number(dump.tau) << "\nbaseline=" << join_ids(dump.baseline)
      << '\n';
  for (const auto& e : dump.entries) {
    out << e.ring.center << ',' << e.ring.band << ',' << index_of(e.point) << ',' << e.weight;
    if (e.ring.color != 0) out << ',' << e.ring.color;
    out << '\n';
  }
  return out.str();
}

CoresetDump parse_coreset(std::string_view text) {
  LineReader in(text);
  expect_header(in, kCoresetHeader);
  CoresetDump dump;
  dump.seed = parse_integer<std::uint64_t>(in, expect_key(in, "seed"));
  dump.sample_size = parse_integer<std::uint64_t>(in, expect_key(in, "s"));
  dump.radius = parse_double(in, expect_key(in, "R"));
  dump.phi = parse_integer<std::size_t>(in, expect_key(in, "phi"));
  dump.tau = parse_double(in, expect_key(in, "tau"));
  dump.baseline = parse_ids(in, expect_key(in, "baseline"));
  while (!in.done()) {
    const std::string_view line = in.next();
    if (line.empty() && in.done()) break;
    const auto fields = split(line, ',');
    if (fields.size() != 4 && fields.size() != 5) in.fail("expected 'i,j,point_id,weight[,color]'");
    CoresetEntry e;
    e.ring.center = parse_integer<std::size_t>(in, fields[0]);
    e.ring.band = parse_integer<std::size_t>(in, fields[1]);
    e.point = point_id(parse_integer<std::uint32_t>(in, fields[2]));
    e.weight = parse_integer<std::uint64_t>(in, fields[3]);
    if (fields.size() == 5) {
      e.ring.color = parse_integer<std::uint32_t>(in, fields[4]);
      if (e.ring.color == 0) in.fail("color 0 is written without a column");
    }
    if (e.weight == 0) in.fail("weights must be positive");
    dump.entries.push_back(e);
  }
  return dump;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace oclust
