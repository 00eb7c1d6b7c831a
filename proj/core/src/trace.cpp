#include "gesturekit/trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "gesturekit/error.hpp"
#include "format.hpp"

namespace gesturekit {

namespace {

std::string trace_name(const std::string& id) { return id.empty() ? std::string("<unnamed>") : "'" + id + "'"; }

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view field, const char* column, std::size_t line) {
  field = trim(field);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw ParseError("column '" + std::string(column) + "' is not a number: '" + std::string(field) + "'", line);
  }
  return value;
}

}  // namespace

Trace::Trace(std::vector<AccelSample> samples, std::optional<std::string> label, std::optional<std::string> subject,
             std::string id)
    : samples_(std::move(samples)), label_(std::move(label)), subject_(std::move(subject)), id_(std::move(id)) {
  if (samples_.size() < 2) {
    throw ValidationError("trace " + trace_name(id_) + " has " + std::to_string(samples_.size()) +
                          " samples; at least 2 are required");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!std::isfinite(s.t) || s.t < 0.0) {
      throw ValidationError("trace " + trace_name(id_) + " sample " + std::to_string(i) + " has invalid timestamp");
    }
    for (double c : s.accel) {
      if (!std::isfinite(c) || std::abs(c) > kMaxAccelG) {
        throw ValidationError("trace " + trace_name(id_) + " sample " + std::to_string(i) +
                              " has an acceleration component outside +/-16 g");
      }
    }
    if (i > 0 && !(s.t > samples_[i - 1].t)) {
      throw ValidationError("trace " + trace_name(id_) + " timestamps are not strictly increasing at sample " +
                            std::to_string(i));
    }
  }
}

std::vector<Vec3> Trace::points() const {
  std::vector<Vec3> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.accel);
  return out;
}

Trace Trace::with_label(std::string label) const {
  Trace copy = *this;
  copy.label_ = std::move(label);
  return copy;
}

Dataset::Dataset(std::vector<Trace> traces, std::string provenance)
    : traces_(std::move(traces)), provenance_(std::move(provenance)) {
  for (const auto& tr : traces_) {
    if (!tr.label()) continue;
    if (std::find(labels_.begin(), labels_.end(), *tr.label()) == labels_.end()) labels_.push_back(*tr.label());
  }
}

std::size_t Dataset::sample_count() const {
  std::size_t n = 0;
  for (const auto& tr : traces_) n += tr.size();
  return n;
}

std::vector<Trace> Dataset::traces_for(const std::string& label) const {
  std::vector<Trace> out;
  for (const auto& tr : traces_) {
    if (tr.label() && *tr.label() == label) out.push_back(tr);
  }
  return out;
}

std::map<std::string, std::size_t> Dataset::counts() const {
  std::map<std::string, std::size_t> out;
  for (const auto& tr : traces_) {
    if (tr.label()) ++out[*tr.label()];
  }
  return out;
}

void Dataset::require_trainable() const {
  if (traces_.empty()) throw ValidationError("dataset is empty");
  for (const auto& tr : traces_) {
    if (!tr.label() || tr.label()->empty()) throw ValidationError("trace " + trace_name(tr.id()) + " is unlabeled");
  }
  const auto by_label = counts();
  for (const auto& label : labels_) {
    if (by_label.at(label) < 2) {
      throw ValidationError("gesture '" + label + "' has " + std::to_string(by_label.at(label)) +
                            " trace(s); at least 2 are required");
    }
  }
}

Dataset read_traces(std::istream& in, AccelUnits units, std::string provenance) {
  struct Pending {
    std::string id;
    std::string label;
    std::string subject;
    std::vector<AccelSample> samples;
  };
  std::vector<Pending> pending;
  std::unordered_map<std::string, std::size_t> index;

  const double scale = units == AccelUnits::kMetersPerSecond2 ? 1.0 / kStandardGravity : 1.0;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = trim(line);
    if (row.empty()) continue;
    if (!header_seen) {
      if (row != kTraceCsvHeader) {
        throw ParseError("expected header '" + std::string(kTraceCsvHeader) + "'", line_no);
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_fields(row);
    if (fields.size() != 7) {
      throw ParseError("expected 7 fields, found " + std::to_string(fields.size()), line_no);
    }
    const std::string id(trim(fields[0]));
    if (id.empty()) throw ParseError("empty trace_id", line_no);
    const std::string label(trim(fields[1]));
    const std::string subject(trim(fields[2]));
    AccelSample s;
    s.t = parse_double(fields[3], "t", line_no);
    s.accel = {parse_double(fields[4], "ax", line_no) * scale, parse_double(fields[5], "ay", line_no) * scale,
               parse_double(fields[6], "az", line_no) * scale};

    auto [it, inserted] = index.try_emplace(id, pending.size());
    if (inserted) pending.push_back({id, label, subject, {}});
    auto& p = pending[it->second];
    if (p.label != label || p.subject != subject) {
      throw ParseError("trace '" + id + "' changes label or subject mid-trace", line_no);
    }
    p.samples.push_back(s);
  }
  if (!header_seen) throw ParseError("missing header line", line_no == 0 ? 1 : line_no);

  std::vector<Trace> traces;
  traces.reserve(pending.size());
  for (auto& p : pending) {
    std::optional<std::string> label = p.label.empty() ? std::nullopt : std::optional<std::string>(p.label);
    std::optional<std::string> subject = p.subject.empty() ? std::nullopt : std::optional<std::string>(p.subject);
    traces.emplace_back(std::move(p.samples), std::move(label), std::move(subject), p.id);
  }
  return Dataset(std::move(traces), std::move(provenance));
}

Dataset load_traces(const std::filesystem::path& path, AccelUnits units) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace file " + path.string());
  return read_traces(in, units, path.string());
}

void write_traces(std::ostream& out, const std::vector<Trace>& traces) {
  out << kTraceCsvHeader << '\n';
  for (std::size_t k = 0; k < traces.size(); ++k) {
    const auto& tr = traces[k];
    const std::string id = tr.id().empty() ? "trace" + std::to_string(k) : tr.id();
    for (const auto& s : tr.samples()) {
      out << id << ',' << tr.label().value_or("") << ',' << tr.subject().value_or("") << ',' << format_double(s.t)
          << ',' << format_double(s.accel[0]) << ',' << format_double(s.accel[1]) << ','
          << format_double(s.accel[2]) << '\n';
    }
  }
}

void save_traces(const std::filesystem::path& path, const std::vector<Trace>& traces) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write trace file " + path.string());
  write_traces(out, traces);
}

}  // namespace gesturekit
