#include "gmf/graphon.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <sstream>

#include "gmf/error.hpp"
#include "gmf/rng.hpp"

namespace gmf {
namespace {

void validate_breakpoints(const std::vector<double>& b) {
  if (b.size() < 2) {
    throw InvalidArgument("graphon partition needs at least the points 0 and 1");
  }
  if (b.front() != 0.0 || b.back() != 1.0) {
    throw InvalidArgument("graphon partition must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < b.size(); ++i) {
    if (!(b[i] > b[i - 1])) {
      throw InvalidArgument("graphon partition must be strictly increasing");
    }
  }
}

// 0-based block index of u under the right-closed partition (a_{k-1}, a_k].
std::size_t block_of(const std::vector<double>& breaks, double u) {
  auto it = std::lower_bound(breaks.begin() + 1, breaks.end(), u);
  if (it == breaks.end()) --it;
  return static_cast<std::size_t>(it - breaks.begin()) - 1;
}

double number_param(const nlohmann::json& doc, const char* key,
                    double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number()) {
    throw ConfigError(std::string("graphon parameter '") + key +
                      "' must be a number");
  }
  return doc[key].get<double>();
}

}  // namespace

Graphon::Graphon(Kernel kernel, std::vector<double> breakpoints,
                 double lipschitz, double bound, bool symmetric,
                 nlohmann::json spec)
    : kernel_(std::move(kernel)),
      breakpoints_(std::move(breakpoints)),
      lipschitz_(lipschitz),
      bound_(bound),
      symmetric_(symmetric),
      spec_(std::move(spec)) {
  if (!kernel_) throw InvalidArgument("graphon kernel is empty");
  validate_breakpoints(breakpoints_);
  if (!(lipschitz_ >= 0.0) || !std::isfinite(lipschitz_)) {
    throw InvalidArgument("graphon Lipschitz constant must be finite and >= 0");
  }
  if (!(bound_ > 0.0) || !std::isfinite(bound_)) {
    throw InvalidArgument("graphon bound must be finite and > 0");
  }
}

double Graphon::min_block_width() const {
  double w = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    w = std::min(w, breakpoints_[i] - breakpoints_[i - 1]);
  }
  return w;
}

double Graphon::degree(double u, std::size_t quadrature) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < quadrature; ++j) {
    sum += kernel_(u, (static_cast<double>(j) + 0.5) / quadrature);
  }
  return sum / static_cast<double>(quadrature);
}

Graphon Graphon::constant(double value) {
  if (!(value > 0.0 && value <= 1.0)) {
    throw InvalidArgument("constant graphon value must lie in (0, 1]");
  }
  return Graphon([value](double, double) { return value; }, {0.0, 1.0}, 0.0,
                 value, true, {{"kind", "constant"}, {"value", value}});
}

Graphon Graphon::triangular() {
  return Graphon([](double u, double v) { return 0.5 * (1.0 - std::abs(u - v)); },
                 {0.0, 1.0}, 0.5, 0.5, true, {{"kind", "triangular_fig1a"}});
}

Graphon Graphon::bike_popularity(double a, double b) {
  // p(v) = a - b v must stay positive on (0, 1].
  if (!(a > 0.0) || !(a - b > 0.0)) {
    throw InvalidArgument("bike popularity a - b v must be positive on (0,1]");
  }
  const double integral = a - 0.5 * b;
  const double bound = std::max(a, a - b) / integral;
  return Graphon([a, b, integral](double, double v) { return (a - b * v) / integral; },
                 {0.0, 1.0}, std::abs(b) / integral, bound, false,
                 {{"kind", "bike_popularity"}, {"a", a}, {"b", b}});
}

Graphon Graphon::blockwise(std::vector<double> breakpoints,
                           std::vector<std::vector<double>> values) {
  validate_breakpoints(breakpoints);
  const std::size_t k = breakpoints.size() - 1;
  if (values.size() != k) {
    throw InvalidArgument("blockwise graphon needs one value row per block");
  }
  double bound = 0.0;
  bool symmetric = true;
  for (std::size_t i = 0; i < k; ++i) {
    if (values[i].size() != k) {
      throw InvalidArgument("blockwise graphon value matrix must be square");
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double x = values[i][j];
      if (!(x >= 0.0 && x <= 1.0)) {
        throw InvalidArgument("blockwise graphon values must lie in [0, 1]");
      }
      bound = std::max(bound, x);
      if (values[j].size() == k && values[i][j] != values[j][i]) symmetric = false;
    }
  }
  if (bound == 0.0) throw InvalidArgument("blockwise graphon is identically zero");
  nlohmann::json spec = {{"kind", "blockwise"}, {"breakpoints", breakpoints},
                         {"values", values}};
  auto shared = std::make_shared<const std::vector<std::vector<double>>>(std::move(values));
  auto breaks = breakpoints;
  return Graphon(
      [shared, breaks](double u, double v) {
        return (*shared)[block_of(breaks, u)][block_of(breaks, v)];
      },
      std::move(breakpoints), 0.0, bound, symmetric, std::move(spec));
}

Graphon Graphon::step(const WeightedGraph& graph) {
  const std::size_t n = graph.n();
  std::vector<double> breaks(n + 1);
  for (std::size_t k = 0; k <= n; ++k) breaks[k] = static_cast<double>(k) / n;
  breaks.back() = 1.0;
  auto shared = std::make_shared<const WeightedGraph>(graph);
  return Graphon([shared](double u, double v) { return shared->step_value(u, v); },
                 std::move(breaks), 0.0, std::max(graph.max_entry(), 1e-300),
                 graph.symmetric());
}

Graphon Graphon::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string()) {
    throw ConfigError("graphon document needs a string field 'kind'");
  }
  const std::string kind = doc["kind"].get<std::string>();
  try {
    Graphon base = [&]() -> Graphon {
      if (kind == "constant") return constant(number_param(doc, "value", 1.0));
      if (kind == "triangular_fig1a") return triangular();
      if (kind == "bike_popularity") {
        return bike_popularity(number_param(doc, "a", 1.0), number_param(doc, "b", 0.5));
      }
      if (kind == "blockwise") {
        if (!doc.contains("breakpoints") || !doc.contains("values")) {
          throw ConfigError("blockwise graphon needs 'breakpoints' and 'values'");
        }
        return blockwise(doc["breakpoints"].get<std::vector<double>>(),
                         doc["values"].get<std::vector<std::vector<double>>>());
      }
      throw ConfigError("unknown graphon kind '" + kind + "'");
    }();
    if (kind == "blockwise") return base;
    std::vector<double> breaks = base.breakpoints();
    double lipschitz = base.lipschitz();
    bool overridden = false;
    if (doc.contains("breakpoints")) {
      breaks = doc["breakpoints"].get<std::vector<double>>();
      overridden = true;
    }
    if (doc.contains("lipschitz")) {
      lipschitz = doc["lipschitz"].get<double>();
      overridden = true;
    }
    if (!overridden) return base;
    nlohmann::json spec = base.spec();
    spec["breakpoints"] = breaks;
    spec["lipschitz"] = lipschitz;
    return Graphon(base.kernel_, std::move(breaks), lipschitz, base.bound(),
                   base.symmetric(), std::move(spec));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid graphon: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed graphon document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

WeightedGraph::WeightedGraph(std::size_t n, std::vector<double> entries)
    : n_(n), entries_(std::move(entries)), binary_(true), symmetric_(true) {
  if (n_ == 0) throw InvalidArgument("graph needs at least one node");
  if (entries_.size() != n_ * n_) {
    throw InvalidArgument("graph entry count does not match n*n");
  }
  for (double x : entries_) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw InvalidArgument("graph entries must be finite and nonnegative");
    }
    if (x != 0.0 && x != 1.0) binary_ = false;
  }
  for (std::size_t k = 0; k < n_ && symmetric_; ++k) {
    for (std::size_t l = k + 1; l < n_; ++l) {
      if (entries_[k * n_ + l] != entries_[l * n_ + k]) {
        symmetric_ = false;
        break;
      }
    }
  }
}

double WeightedGraph::max_entry() const {
  return *std::max_element(entries_.begin(), entries_.end());
}

std::size_t cell_of(double u, std::size_t n) {
  // Small slack so that u = k/n computed in floating point lands in cell k.
  const double scaled = u * static_cast<double>(n);
  auto k = static_cast<std::ptrdiff_t>(std::ceil(scaled - 1e-9 * std::max(1.0, scaled)));
  k = std::clamp<std::ptrdiff_t>(k, 1, static_cast<std::ptrdiff_t>(n));
  return static_cast<std::size_t>(k);
}

double WeightedGraph::step_value(double u, double v) const {
  return (*this)(cell_of(u, n_) - 1, cell_of(v, n_) - 1);
}

namespace {

constexpr char kMagic[8] = {'G', 'M', 'F', 'G', 'R', 'A', 'P', 'H'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t offset,
                     int width) {
  std::uint64_t x = 0;
  for (int i = 0; i < width; ++i) {
    x |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
  }
  return x;
}

}  // namespace

std::vector<std::uint8_t> WeightedGraph::serialize() const {
  if (n_ > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument("graph too large for the binary format");
  }
  std::vector<std::uint8_t> out;
  out.reserve(12 + 8 * entries_.size());
  for (auto c : kMagic) out.push_back(static_cast<std::uint8_t>(c));
  put_u32(out, static_cast<std::uint32_t>(n_));
  for (double x : entries_) put_f64(out, x);
  return out;
}

WeightedGraph WeightedGraph::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw IoError("not a GMFGRAPH file (bad magic)");
  }
  const auto n = static_cast<std::size_t>(get_le(bytes, 8, 4));
  if (bytes.size() != 12 + 8 * n * n) {
    throw IoError("GMFGRAPH payload size does not match header N=" + std::to_string(n));
  }
  std::vector<double> entries(n * n);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i] = std::bit_cast<double>(get_le(bytes, 12 + 8 * i, 8));
  }
  try {
    return WeightedGraph(n, std::move(entries));
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("GMFGRAPH payload invalid: ") + e.what());
  }
}

void WeightedGraph::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

WeightedGraph WeightedGraph::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

void WeightedGraph::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "k,l,value\n";
  for (std::size_t k = 0; k < n_; ++k) {
    for (std::size_t l = 0; l < n_; ++l) {
      out << k + 1 << ',' << l + 1 << ',' << (*this)(k, l) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------

WeightedGraph discretize_deterministic(const Graphon& g, std::size_t n) {
  if (n == 0) throw InvalidArgument("discretization needs n >= 1");
  std::vector<double> entries(n * n);
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = static_cast<double>(k + 1) / nd;
    for (std::size_t l = 0; l < n; ++l) {
      entries[k * n + l] = g(u, static_cast<double>(l + 1) / nd);
    }
  }
  return WeightedGraph(n, std::move(entries));
}

WeightedGraph sample_stochastic(const Graphon& g, std::size_t n,
                                std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("sampling needs n >= 1");
  if (!g.symmetric()) {
    throw InvalidArgument(
        "stochastic sampling requires a symmetric graphon");
  }
  auto eng = rng::stream(seed, rng::kGraphStream);
  std::vector<double> entries(n * n);
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = static_cast<double>(k + 1) / nd;
    for (std::size_t l = k; l < n; ++l) {
      const double p = g(u, static_cast<double>(l + 1) / nd);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidArgument("graphon value outside [0, 1] cannot be an edge probability");
      }
      const double x = rng::bernoulli(eng, p) ? 1.0 : 0.0;
      entries[k * n + l] = x;
      entries[l * n + k] = x;
    }
  }
  return WeightedGraph(n, std::move(entries));
}

}  // namespace gmf
