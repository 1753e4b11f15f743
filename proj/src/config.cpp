#include "twk/config.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace twk {

namespace {

std::string trimmed(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

double toReal(const std::string& v, const std::string& k) {
  double out = 0.0;
  const auto rc = std::from_chars(v.data(), v.data() + v.size(), out);
  if (rc.ec != std::errc{} || rc.ptr != v.data() + v.size()) {
    throw std::invalid_argument("config: bad number for " + k + ": '" + v + "'");
  }
  return out;
}

std::size_t toCount(const std::string& v, const std::string& k) {
  const double d = toReal(v, k);
  if (d < 0 || d != static_cast<double>(static_cast<std::size_t>(d))) {
    throw std::invalid_argument("config: " + k + " must be a non-negative integer");
  }
  return static_cast<std::size_t>(d);
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("config: cannot open " + path);
  }
  RunConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trimmed(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not key=value");
    }
    const std::string k = trimmed(line.substr(0, eq));
    const std::string v = trimmed(line.substr(eq + 1));
    if (k == "dataset") c.dataset = v;
    else if (k == "window") c.window = toCount(v, k);
    else if (k == "interval") c.interval = toCount(v, k);
    else if (k == "bits") c.bits = toCount(v, k);
    else if (k == "steps") c.steps = toCount(v, k);
    else if (k == "gamma") c.gamma = toReal(v, k);
    else if (k == "schedule") {
      if (v == "linear") c.schedule = ScheduleKind::linear;
      else if (v == "cosine") c.schedule = ScheduleKind::cosine;
      else throw std::invalid_argument("config: schedule must be linear or cosine");
    }
    else if (k == "beta_min") c.beta_min = toReal(v, k);
    else if (k == "beta_max") c.beta_max = toReal(v, k);
    else if (k == "key") c.key_hex = v;
    else if (k == "estimator") c.estimator = v;
    else if (k == "batch") c.batch = toCount(v, k);
    else if (k == "attack") c.attack = AttackSpec::parse(v);
    else if (k == "out") c.out = v;
    else if (k == "normalization") {
      if (v == "none") c.normalization = Normalization::none;
      else if (v == "minmax") c.normalization = Normalization::minmax;
      else if (v == "zscore") c.normalization = Normalization::zscore;
      else throw std::invalid_argument("config: unknown normalization '" + v + "'");
    }
    else if (k == "fit_stride") c.fit_stride = toCount(v, k);
    else if (k == "baseline") c.baseline = toCount(v, k);
    else if (k == "fpr") c.fpr = toReal(v, k);
    else if (k == "samples_per_record") c.samples_per_record = toCount(v, k);
    else if (k == "z_threshold") c.z_threshold = toReal(v, k);
    else if (k == "threads") c.threads = toCount(v, k);
    else if (k == "ridge") c.ridge = toReal(v, k);
    else throw std::invalid_argument("config: unknown key '" + k + "'");
  }
  if (c.fpr <= 0.0 || c.fpr >= 1.0) {
    throw std::invalid_argument("config: fpr must be in (0,1)");
  }
  if (c.batch < 1 || c.baseline < 2) {
    throw std::invalid_argument("config: batch must be >= 1 and baseline >= 2");
  }
  return c;
}

WatermarkKey RunConfig::key() const {
  if (key_hex.empty()) {
    throw std::invalid_argument("config: no key set (use keygen and the key= entry)");
  }
  return WatermarkKey::fromHex(key_hex);
}

NoiseSchedule RunConfig::makeSchedule() const {
  return build_schedule(steps, schedule, beta_min, beta_max, gamma);
}

EmbedParams RunConfig::embedParams(std::size_t features) const {
  EmbedParams p;
  p.bit_levels = bits;
  p.interval = interval;
  p.window = window;
  p.features = features;
  p.key = key();
  p.validate();
  return p;
}

RunConfig::Prepared RunConfig::prepare() const {
  if (dataset.empty()) {
    throw std::invalid_argument("config: dataset path is required");
  }
  Prepared out;
  out.data = Dataset::loadCsv(dataset);
  out.data.normalize(normalization);
  out.features = out.data.features();

  if (estimator == "analytic") {
    const SeriesTensor fit = twk::window(out.data, window, fit_stride);
    out.estimator = std::make_unique<AnalyticGaussianEstimator>(
        AnalyticGaussianEstimator::fromSamples(fit, makeSchedule(), ridge));
  } else if (estimator.rfind("loaded:", 0) == 0) {
    out.estimator = std::make_unique<LoadedLinearEstimator>(
        LoadedLinearEstimator::load(estimator.substr(7)));
    if (out.estimator->dim() != window * out.features) {
      throw std::invalid_argument("config: loaded estimator dim does not match W*F");
    }
  } else {
    throw std::invalid_argument("config: estimator must be analytic or loaded:<path>");
  }
  return out;
}

}  // namespace twk
