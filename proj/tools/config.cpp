#include "config.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

namespace terrasense::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

ConfigError::ConfigError(const std::string& message, std::string source, int line,
                         std::string key)
    : std::runtime_error(message), source_(std::move(source)), line_(line), key_(std::move(key)) {}

namespace {

// Input iterator that counts the newlines the parser has consumed.
struct CountingIterator {
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  const char* at = nullptr;
  int* line = nullptr;

  reference operator*() const { return *at; }
  CountingIterator& operator++() {
    if (*at == '\n') ++*line;
    ++at;
    return *this;
  }
  CountingIterator operator++(int) {
    CountingIterator old = *this;
    ++*this;
    return old;
  }
  bool operator==(const CountingIterator& other) const { return at == other.at; }
  bool operator!=(const CountingIterator& other) const { return at != other.at; }
};

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

// Records the source line of every key and array element, by JSON pointer.
class LineIndexer final : public nlohmann::json_sax<json> {
 public:
  explicit LineIndexer(const int* line) : line_(line) {}

  std::map<std::string, int> lines;

  bool null() override { return value(); }
  bool boolean(bool) override { return value(); }
  bool number_integer(number_integer_t) override { return value(); }
  bool number_unsigned(number_unsigned_t) override { return value(); }
  bool number_float(number_float_t, const string_t&) override { return value(); }
  bool string(string_t&) override { return value(); }
  bool binary(binary_t&) override { return value(); }
  bool start_object(std::size_t) override { return open(false); }
  bool start_array(std::size_t) override { return open(true); }
  bool end_object() override { return close(); }
  bool end_array() override { return close(); }
  bool key(string_t& k) override {
    Frame& top = stack_.back();
    top.key = escape_token(k);
    lines.emplace(top.pointer + "/" + top.key, *line_);
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override {
    return false;
  }

 private:
  struct Frame {
    bool array = false;
    std::size_t index = 0;
    std::string pointer;
    std::string key;
  };

  std::string child() {
    if (stack_.empty()) return "";
    Frame& top = stack_.back();
    if (!top.array) return top.pointer + "/" + top.key;
    std::string p = top.pointer + "/" + std::to_string(top.index++);
    lines.emplace(p, *line_);
    return p;
  }
  bool value() {
    child();
    return true;
  }
  bool open(bool array) {
    std::string p = child();
    stack_.push_back(Frame{array, 0, std::move(p), {}});
    return true;
  }
  bool close() {
    stack_.pop_back();
    return true;
  }

  const int* line_;
  std::vector<Frame> stack_;
};

struct Context {
  std::string source;
  std::map<std::string, int> lines;
  fs::path base;
};

// Location of a value: JSON pointer for line lookup, dotted name for messages.
struct Path {
  std::string pointer;
  std::string name;

  Path key(const std::string& k) const {
    return {pointer + "/" + escape_token(k), name.empty() ? k : name + "." + k};
  }
  Path index(std::size_t i) const {
    return {pointer + "/" + std::to_string(i), name + "[" + std::to_string(i) + "]"};
  }
};

[[noreturn]] void fail(const Context& ctx, const Path& path, const std::string& message) {
  int line = 0;
  for (std::string p = path.pointer;; p = p.substr(0, p.rfind('/'))) {
    if (auto it = ctx.lines.find(p); it != ctx.lines.end()) {
      line = it->second;
      break;
    }
    if (p.empty()) break;
  }
  std::ostringstream msg;
  msg << ctx.source;
  if (line > 0) msg << ":" << line;
  msg << ": " << (path.name.empty() ? "document" : path.name) << ": " << message;
  throw ConfigError(msg.str(), ctx.source, line, path.name);
}

double number(const json& v, const Path& path, const Context& ctx) {
  if (!v.is_number()) fail(ctx, path, "expected a number");
  return v.get<double>();
}

double positive(const json& v, const Path& path, const Context& ctx) {
  const double x = number(v, path, ctx);
  if (!(x > 0.0) || !std::isfinite(x)) fail(ctx, path, "must be positive");
  return x;
}

double non_negative(const json& v, const Path& path, const Context& ctx) {
  const double x = number(v, path, ctx);
  if (!(x >= 0.0) || !std::isfinite(x)) fail(ctx, path, "must be non-negative");
  return x;
}

long long integer(const json& v, const Path& path, const Context& ctx, long long lo) {
  if (!v.is_number_integer()) fail(ctx, path, "expected an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(LLONG_MAX)) {
    fail(ctx, path, "integer out of range");
  }
  const long long x = v.get<long long>();
  if (x < lo) fail(ctx, path, "must be at least " + std::to_string(lo));
  return x;
}

std::string text(const json& v, const Path& path, const Context& ctx) {
  if (!v.is_string()) fail(ctx, path, "expected a string");
  return v.get<std::string>();
}

Eigen::VectorXd vector_of(const json& v, const Path& path, const Context& ctx, Eigen::Index size,
                          double (*check)(const json&, const Path&, const Context&)) {
  if (!v.is_array()) fail(ctx, path, "expected an array");
  if (static_cast<Eigen::Index>(v.size()) != size) {
    fail(ctx, path, "expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
  }
  Eigen::VectorXd out(size);
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = check(v[i], path.index(i), ctx);
  return out;
}

// Converts the parse of an enumerated name, reporting failures against the key.
template <typename F>
auto named(const json& v, const Path& path, const Context& ctx, F&& parse) {
  const std::string s = text(v, path, ctx);
  try {
    return parse(s);
  } catch (const std::exception& e) {
    fail(ctx, path, e.what());
  }
}

// Object whose keys must all be consumed.
class Section {
 public:
  Section(const json& v, Path path, const Context& ctx) : v_(v), path_(std::move(path)), ctx_(ctx) {
    if (!v.is_object()) fail(ctx, path_, "expected an object");
  }

  const json* get(const std::string& k) {
    seen_.insert(k);
    auto it = v_.find(k);
    return it == v_.end() ? nullptr : &*it;
  }
  Path at(const std::string& k) const { return path_.key(k); }
  const Context& ctx() const { return ctx_; }

  void finish() const {
    for (auto it = v_.begin(); it != v_.end(); ++it) {
      if (!seen_.count(it.key())) fail(ctx_, path_.key(it.key()), "unknown key");
    }
  }

 private:
  const json& v_;
  Path path_;
  const Context& ctx_;
  std::set<std::string> seen_;
};

VehicleParams read_vehicle(Section& s) {
  ModelOrder order = ModelOrder::TwoDof;
  if (const json* v = s.get("model")) order = named(*v, s.at("model"), s.ctx(), model_order_from_string);
  VehicleParams p = order == ModelOrder::TwoDof ? VehicleParams::offroad_reference()
                                                : VehicleParams::lunar_roving_vehicle();
  const auto field = [&](const char* k, double& dst) {
    if (const json* v = s.get(k)) dst = positive(*v, s.at(k), s.ctx());
  };
  field("sprung_mass", p.sprung_mass);
  field("suspension_stiffness", p.suspension_stiffness);
  field("suspension_damping", p.suspension_damping);
  for (const char* k : {"unsprung_mass", "tire_stiffness"}) {
    if (order == ModelOrder::OneDofLRV && s.get(k)) {
      fail(s.ctx(), s.at(k), "not used by the one_dof_lrv model");
    }
  }
  if (order == ModelOrder::TwoDof) {
    field("unsprung_mass", p.unsprung_mass);
    field("tire_stiffness", p.tire_stiffness);
  }
  s.finish();
  return p;
}

TerrainPath read_path(const json& v, const Path& path, const Context& ctx,
                      const TerrainCatalog& catalog) {
  if (!v.is_array() || v.empty()) fail(ctx, path, "expected a non-empty array of segments");
  TerrainPath out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    Section seg(v[i], path.index(i), ctx);
    TerrainSegment segment;
    const json* terrain = seg.get("terrain");
    const json* stiffness = seg.get("stiffness");
    const json* name = seg.get("name");
    if (terrain && (stiffness || name)) {
      fail(ctx, seg.at("terrain"), "give either a catalog terrain or name and stiffness");
    }
    if (terrain) {
      const std::string t = text(*terrain, seg.at("terrain"), ctx);
      if (!catalog.contains(t)) fail(ctx, seg.at("terrain"), "unknown terrain '" + t + "'");
      segment.terrain = catalog.find(t);
    } else if (stiffness) {
      segment.terrain.name = name ? text(*name, seg.at("name"), ctx) : "custom";
      segment.terrain.equivalent_stiffness = positive(*stiffness, seg.at("stiffness"), ctx);
    } else {
      fail(ctx, path.index(i), "segment needs 'terrain' or 'stiffness'");
    }
    const json* duration = seg.get("duration");
    if (!duration) fail(ctx, path.index(i), "segment needs 'duration'");
    segment.duration = positive(*duration, seg.at("duration"), ctx);
    seg.finish();
    out.segments.push_back(std::move(segment));
  }
  return out;
}

ProfileSpec read_profile(Section& s) {
  ProfileSpec spec = ProfileSpec::iso(IsoClass::D);
  const json* iso = s.get("iso_class");
  const json* level = s.get("psd_reference");
  if (iso && level) fail(s.ctx(), s.at("psd_reference"), "give either iso_class or psd_reference");
  if (iso) {
    const IsoClass c = named(*iso, s.at("iso_class"), s.ctx(), iso_class_from_string);
    if (c == IsoClass::Custom) fail(s.ctx(), s.at("iso_class"), "use psd_reference for a custom level");
    spec = ProfileSpec::iso(c);
  }
  if (level) {
    spec.iso_class = IsoClass::Custom;
    spec.psd_reference = non_negative(*level, s.at("psd_reference"), s.ctx());
  }
  const auto field = [&](const char* k, double& dst) {
    if (const json* v = s.get(k)) dst = positive(*v, s.at(k), s.ctx());
  };
  field("reference_frequency", spec.reference_frequency);
  if (const json* v = s.get("waviness_exponent")) {
    spec.waviness_exponent = number(*v, s.at("waviness_exponent"), s.ctx());
  }
  field("band_min", spec.band_min);
  field("band_max", spec.band_max);
  if (const json* v = s.get("components")) {
    spec.components = static_cast<int>(integer(*v, s.at("components"), s.ctx(), 1));
  }
  if (!(spec.band_max > spec.band_min)) fail(s.ctx(), s.at("band_max"), "must exceed band_min");
  s.finish();
  return spec;
}

void read_estimator(Section& s, Scenario& sc) {
  const Context& ctx = s.ctx();
  if (const json* v = s.get("filter")) sc.filter = named(*v, s.at("filter"), ctx, filter_kind_from_string);
  if (const json* v = s.get("initial_guess")) {
    sc.initial_guess = named(*v, s.at("initial_guess"), ctx, initial_guess_policy_from_string);
  }
  if (const json* v = s.get("initial_variances")) {
    sc.initial_variances = vector_of(*v, s.at("initial_variances"), ctx, sc.vehicle.state_dim(), non_negative);
  }
  if (const json* v = s.get("taylor_order")) {
    sc.taylor_order = static_cast<int>(integer(*v, s.at("taylor_order"), ctx, 1));
  }
  if (const json* v = s.get("ekf_measurement_jacobian")) {
    sc.ekf_measurement_jacobian = named(*v, s.at("ekf_measurement_jacobian"), ctx, measurement_jacobian_from_string);
  }
  s.finish();
}

SweepSettings read_sweep(Section& s) {
  const Context& ctx = s.ctx();
  SweepSettings out;
  if (const json* v = s.get("axis")) out.axis = named(*v, s.at("axis"), ctx, sweep_axis_from_string);
  if (const json* v = s.get("values")) {
    const Path path = s.at("values");
    if (!v->is_array() || v->empty()) fail(ctx, path, "expected a non-empty array");
    out.values.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& item = (*v)[i];
      if (out.axis == SweepAxis::Velocity) {
        std::ostringstream os;
        os << non_negative(item, path.index(i), ctx);
        out.values.push_back(os.str());
      } else {
        const std::string name = text(item, path.index(i), ctx);
        const IsoClass c = named(item, path.index(i), ctx, iso_class_from_string);
        if (c == IsoClass::Custom) fail(ctx, path.index(i), "a sweep needs ISO classes A-G");
        out.values.push_back(name);
      }
    }
  } else if (out.axis == SweepAxis::Velocity) {
    out.values = {"2", "5", "10"};
  }
  s.finish();
  return out;
}

ObservabilitySettings read_observability(Section& s, const VehicleParams& vehicle) {
  const Context& ctx = s.ctx();
  ObservabilitySettings out;
  if (const json* v = s.get("state")) {
    out.state = vector_of(*v, s.at("state"), ctx, vehicle.state_dim(), number);
  }
  if (const json* v = s.get("input")) out.input = number(*v, s.at("input"), ctx);
  if (const json* v = s.get("measurement_rows")) {
    const Path path = s.at("measurement_rows");
    if (!v->is_array()) fail(ctx, path, "expected an array");
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const long long r = integer((*v)[i], path.index(i), ctx, 0);
      if (r >= vehicle.measurement_dim()) {
        fail(ctx, path.index(i), "must be below " + std::to_string(vehicle.measurement_dim()));
      }
      rows.push_back(static_cast<Eigen::Index>(r));
    }
    out.measurement_rows = std::move(rows);
  }
  if (const json* v = s.get("tolerance")) {
    out.tolerance = non_negative(*v, s.at("tolerance"), ctx);
    if (!(out.tolerance < 1.0)) fail(ctx, s.at("tolerance"), "must be below 1");
  }
  s.finish();
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text_in, const std::string& source, const fs::path& base) {
  Context ctx{source, {}, base};

  json doc;
  try {
    doc = json::parse(text_in);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text_in.size());
    int line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < byte; ++i) {
      if (text_in[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    if (auto colon = what.find(": "); colon != std::string::npos) what = what.substr(colon + 2);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                          ": malformed JSON: " + what,
                      source, line, "");
  }

  int line = 1;
  LineIndexer indexer(&line);
  json::sax_parse(CountingIterator{text_in.data(), &line},
                  CountingIterator{text_in.data() + text_in.size(), &line}, &indexer);
  ctx.lines = std::move(indexer.lines);

  RunConfig cfg;
  Scenario& sc = cfg.scenario;
  Section root(doc, Path{}, ctx);

  if (const json* v = root.get("vehicle")) {
    Section s(*v, root.at("vehicle"), ctx);
    sc.vehicle = read_vehicle(s);
  }
  if (sc.vehicle.model_order == ModelOrder::OneDofLRV) {
    sc.noise = NoiseConfig::reference(ModelOrder::OneDofLRV);
  }

  TerrainCatalog catalog = TerrainCatalog::builtin();
  if (const json* v = root.get("terrain_catalog")) {
    fs::path p = text(*v, root.at("terrain_catalog"), ctx);
    if (p.is_relative() && !base.empty()) p = base / p;
    try {
      catalog = TerrainCatalog::load(p);
    } catch (const std::exception& e) {
      fail(ctx, root.at("terrain_catalog"), e.what());
    }
  }
  if (const json* v = root.get("path")) {
    sc.path = read_path(*v, root.at("path"), ctx, catalog);
  } else {
    const char* fallback = sc.vehicle.model_order == ModelOrder::TwoDof ? "Graneville loam" : "Lunar Regolith";
    if (!catalog.contains(fallback)) fail(ctx, root.at("path"), "required when the catalog lacks the default terrain");
    sc.path.segments = {{catalog.find(fallback), 10.0}};
  }

  if (const json* v = root.get("profile")) {
    Section s(*v, root.at("profile"), ctx);
    sc.profile = read_profile(s);
  }
  if (const json* v = root.get("velocity")) sc.velocity = non_negative(*v, root.at("velocity"), ctx);
  if (const json* v = root.get("dt")) sc.dt = positive(*v, root.at("dt"), ctx);
  if (const json* v = root.get("seed")) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
      fail(ctx, root.at("seed"), "expected a non-negative integer");
    }
    sc.seed = v->get<std::uint64_t>();
  }

  if (const json* v = root.get("noise")) {
    Section s(*v, root.at("noise"), ctx);
    if (const json* q = s.get("process")) {
      sc.noise.Q = vector_of(*q, s.at("process"), ctx, sc.vehicle.state_dim(), non_negative).asDiagonal();
    }
    if (const json* r = s.get("measurement")) {
      sc.noise.R = vector_of(*r, s.at("measurement"), ctx, sc.vehicle.measurement_dim(), positive).asDiagonal();
    }
    s.finish();
  }

  if (const json* v = root.get("estimator")) {
    Section s(*v, root.at("estimator"), ctx);
    read_estimator(s, sc);
  }
  if (const json* v = root.get("metrics")) {
    Section s(*v, root.at("metrics"), ctx);
    if (const json* w = s.get("rmse_window")) sc.rmse_window = positive(*w, s.at("rmse_window"), ctx);
    if (const json* w = s.get("adaptation_threshold_pct")) {
      sc.adaptation_threshold_pct = positive(*w, s.at("adaptation_threshold_pct"), ctx);
    }
    s.finish();
  }
  if (const json* v = root.get("montecarlo")) {
    Section s(*v, root.at("montecarlo"), ctx);
    if (const json* w = s.get("runs")) cfg.runs = static_cast<int>(integer(*w, s.at("runs"), ctx, 1));
    if (const json* w = s.get("threads")) cfg.threads = static_cast<int>(integer(*w, s.at("threads"), ctx, 1));
    s.finish();
  }
  if (const json* v = root.get("sweep")) {
    Section s(*v, root.at("sweep"), ctx);
    cfg.sweep = read_sweep(s);
  }
  if (const json* v = root.get("observability")) {
    Section s(*v, root.at("observability"), ctx);
    cfg.observability = read_observability(s, sc.vehicle);
  }
  if (const json* v = root.get("output")) {
    Section s(*v, root.at("output"), ctx);
    if (const json* w = s.get("directory")) {
      fs::path p = text(*w, s.at("directory"), ctx);
      if (p.is_relative() && !base.empty()) p = base / p;
      cfg.output_directory = p;
    }
    if (const json* w = s.get("precision")) {
      cfg.precision = static_cast<int>(integer(*w, s.at("precision"), ctx, 1));
      if (cfg.precision > 17) fail(ctx, s.at("precision"), "must be at most 17");
    }
    s.finish();
  }
  root.finish();

  if (sc.duration() < sc.dt) fail(ctx, root.at("dt"), "must not exceed the path duration");
  try {
    sc.validate();
  } catch (const std::exception& e) {
    throw ConfigError(source + ": " + e.what(), source, 0, "");
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot read config file '" + path.string() + "'", path.string(), 0, "");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string(), path.parent_path());
}

Eigen::VectorXd default_observability_state(const Scenario& scenario) {
  const VehicleParams& vp = scenario.vehicle;
  const double kt = vp.series_stiffness();
  const double ktot = combined_stiffness(scenario.path.segments.front().terrain.equivalent_stiffness, kt);
  if (vp.model_order == ModelOrder::TwoDof) {
    return Eigen::Vector<double, 5>(0.01, 0.1, 0.005, 0.1, ktot);
  }
  return Eigen::Vector3d(0.01, 0.1, ktot);
}

}  // namespace terrasense::cli
