#include "socdfn/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "socdfn/rng.hpp"

namespace socdfn {

Dataset Dataset::subset(std::span<const std::size_t> indices, std::string subset_name) const {
  Dataset out{std::move(subset_name), {}};
  out.records.reserve(indices.size());
  for (std::size_t i : indices) out.records.push_back(records.at(i));
  return out;
}

namespace {

std::string at_line(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

bool parse_field(std::string_view text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

void append_number(std::string& line, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  line.append(buf, ptr);
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ValidationError(at_line(path, 1) + "empty dataset");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader)
    throw ParseError(at_line(path, 1) + "header must be '" + std::string(kCsvHeader) + "', got '" + line + "'");

  Dataset d{path.stem().string(), {}};
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw ParseError(at_line(path, lineno) + "blank line");
    }
    std::array<double, 5> v{};
    std::size_t field = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view text =
          std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (field >= v.size()) throw ParseError(at_line(path, lineno) + "expected 5 fields");
      if (!parse_field(text, v[field]))
        throw ParseError(at_line(path, lineno) + "field " + std::to_string(field + 1) + " is not a finite number: '" +
                         std::string(text) + "'");
      ++field;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (field != v.size()) throw ParseError(at_line(path, lineno) + "expected 5 fields, got " + std::to_string(field));

    SampleRecord r{v[0], v[1], v[2], v[3], v[4]};
    if (r.soc < 0.0 || r.soc > 100.0)
      throw ValidationError(at_line(path, lineno) + "soc_pct " + std::to_string(r.soc) + " outside [0,100]");
    if (r.voltage <= 0.0) throw ValidationError(at_line(path, lineno) + "voltage_v must be positive");
    if (!d.records.empty() && r.t < d.records.back().t)
      throw ValidationError(at_line(path, lineno) + "t_s decreases");
    d.records.push_back(r);
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  if (d.records.empty()) throw ValidationError(at_line(path, lineno) + "empty dataset");
  return d;
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  std::string line;
  out << kCsvHeader << '\n';
  for (const auto& r : d.records) {
    line.clear();
    for (double v : {r.t, r.voltage, r.current, r.temperature, r.soc}) {
      if (!line.empty()) line.push_back(',');
      append_number(line, v);
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw IoError("write failure on " + path.string());
}

Normalizer fit_normalizer(const Dataset& train) {
  if (train.empty()) throw ValidationError("cannot fit normalizer on an empty dataset");
  Normalizer n;
  const double count = static_cast<double>(train.size());
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    double sum = 0.0;
    for (const auto& r : train.records) sum += r.features()[f];
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto& r : train.records) {
      const double dev = r.features()[f] - mean;
      ss += dev * dev;
    }
    const double sd = std::sqrt(ss / count);
    if (!(sd > 0.0)) throw ValidationError(std::string("degenerate feature '") + kFeatureNames[f] + "': constant value");
    n.mean[f] = mean;
    n.std[f] = sd;
  }
  n.fitted = true;
  return n;
}

Matrix apply_normalizer(const Normalizer& n, std::span<const SampleRecord> records) {
  if (!n.fitted) throw ContractError("normalizer has not been fitted");
  if (records.empty()) throw ShapeError("cannot normalize zero rows");
  Matrix x(records.size(), kFeatureCount);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto raw = records[i].features();
    for (std::size_t f = 0; f < kFeatureCount; ++f) x(i, f) = (raw[f] - n.mean[f]) / n.std[f];
  }
  return x;
}

Matrix apply_normalizer(const Normalizer& n, const Dataset& d) { return apply_normalizer(n, std::span(d.records)); }

Vector targets(const Dataset& d) {
  Vector y(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) y[i] = d.records[i].soc;
  return y;
}

HoldoutSplit split_holdout(const Dataset& d, double train_frac, double val_frac, std::uint64_t seed, bool shuffle) {
  if (!(train_frac > 0.0) || !(val_frac > 0.0) || !(train_frac + val_frac < 1.0))
    throw ConfigError("split fractions must be positive with train + val < 1");
  const std::size_t n = d.size();
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_frac));
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * val_frac));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n)
    throw ConfigError("holdout split of " + std::to_string(n) + " rows leaves an empty partition");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    Rng rng(seed);
    rng.shuffle(std::span(order));
  }
  HoldoutSplit s;
  s.train_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                   order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  s.train = d.subset(s.train_idx, d.name + "-train");
  s.val = d.subset(s.val_idx, d.name + "-val");
  s.test = d.subset(s.test_idx, d.name + "-test");
  return s;
}

HoldoutSplit split_train_val(const Dataset& d, double val_frac, std::uint64_t seed, bool shuffle) {
  if (!(val_frac > 0.0 && val_frac < 1.0)) throw ConfigError("validation fraction must lie in (0,1)");
  const std::size_t n = d.size();
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * val_frac));
  if (n_val == 0 || n_val >= n)
    throw ConfigError("train/validation split of " + std::to_string(n) + " rows leaves an empty partition");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    Rng rng(seed);
    rng.shuffle(std::span(order));
  }
  HoldoutSplit s;
  s.train_idx.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
  s.val_idx.assign(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());
  s.train = d.subset(s.train_idx, d.name + "-train");
  s.val = d.subset(s.val_idx, d.name + "-val");
  s.test.name = d.name + "-test";
  return s;
}

std::vector<std::size_t> FoldAssignment::validation_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldAssignment::training_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] != fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t f : fold_of) ++sizes.at(f);
  return sizes;
}

FoldAssignment kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n)
    throw ConfigError("k-fold needs 2 <= k <= n, got k=" + std::to_string(k) + " n=" + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span(order));
  FoldAssignment a{k, std::vector<std::size_t>(n)};
  for (std::size_t pos = 0; pos < n; ++pos) a.fold_of[order[pos]] = pos % k;
  return a;
}

std::vector<Batch> batch_iter(const Matrix& x, const Vector& y, std::size_t batch_size,
                              std::optional<std::uint64_t> shuffle_seed) {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (x.rows() != y.size())
    throw ShapeError("batch_iter: " + std::to_string(x.rows()) + " feature rows vs " + std::to_string(y.size()) +
                     " targets");
  const std::size_t n = x.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    rng.shuffle(std::span(order));
  }
  std::vector<Batch> batches;
  batches.reserve((n + batch_size - 1) / batch_size);
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t len = std::min(batch_size, n - start);
    Batch b{Matrix(len, x.cols()), Vector(len), {}};
    b.rows.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                  order.begin() + static_cast<std::ptrdiff_t>(start + len));
    for (std::size_t r = 0; r < len; ++r) {
      const auto src = x.row(b.rows[r]);
      std::copy(src.begin(), src.end(), b.x.row(r).begin());
      b.y[r] = y[b.rows[r]];
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace socdfn
