#include "mslmb/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mslmb {

namespace {

using nlohmann::json;

constexpr std::uint64_t kBirthLayoutStream = 0xB1B1B1B1ULL;

/// Symmetric square root that tolerates semi-definite input (e.g. zero noise).
Matrix sqrt_psd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Vector standard_normal(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = normal(rng);
  return v;
}

bool bernoulli(double p, Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

Vector to_vector(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Matrix to_matrix(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != m.cols()) throw ScenarioError("ragged matrix in scenario");
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return m;
}

json from_vector(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json from_matrix(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

/// Covariance given either as "cov" (matrix) or "std" (per-axis standard deviations).
Matrix covariance_from(const json& j, const char* what) {
  if (j.contains("cov")) return to_matrix(j.at("cov"));
  if (j.contains("std")) {
    const Vector sd = to_vector(j.at("std"));
    return sd.array().square().matrix().asDiagonal();
  }
  throw ScenarioError(std::string(what) + ": needs \"cov\" or \"std\"");
}

SensorModel sensor_from(const json& j, const Region& region) {
  Matrix noise;
  if (j.contains("noise")) {
    noise = to_matrix(j.at("noise"));
  } else {
    noise = j.value("noise_variance", 1.0) * Matrix::Identity(2, 2);
  }
  Matrix c = Matrix::Zero(2, 4);
  if (j.contains("matrix")) {
    c = to_matrix(j.at("matrix"));
  } else {
    c(0, 0) = 1.0;
    c(1, 1) = 1.0;
  }
  return {LinearGaussianMap(c, noise), j.at("detection").get<double>(), j.at("clutter_rate").get<double>(),
          region.area()};
}

}  // namespace

MotionModel Scenario::motion() const { return {constant_velocity_model(dt, process_intensity), survival}; }

void Scenario::validate() const {
  if (duration < 1) throw ScenarioError("scenario: duration must be >= 1");
  if (!(dt > 0.0)) throw ScenarioError("scenario: dt must be positive");
  if (!(process_intensity >= 0.0)) throw ScenarioError("scenario: negative process intensity");
  if (!(survival >= 0.0 && survival <= 1.0)) throw ScenarioError("scenario: survival outside [0,1]");
  if (!(region.x_max > region.x_min && region.y_max > region.y_min)) throw ScenarioError("scenario: degenerate region");
  for (const auto& b : birth.locations()) {
    if (b.spatial.dim() != 4) throw ScenarioError("scenario: birth densities must be 4-dimensional");
  }
  for (const auto& s : sensors) {
    s.validate();
    if (s.map.input_dim() != 4) throw ScenarioError("scenario: sensor must observe the 4-dimensional state");
    if (s.clutter_rate > 0.0 && s.map.output_dim() != 2) {
      throw ScenarioError("scenario: clutter is only generated for 2-dimensional position measurements");
    }
    if (std::abs(s.region_volume - region.area()) > 1e-9 * region.area()) {
      throw ScenarioError("scenario: sensor region volume disagrees with the region");
    }
  }
  for (const auto& x : initial_objects) {
    if (x.size() != 4) throw ScenarioError("scenario: initial objects must be 4-dimensional");
  }
  if (!initial_objects.empty()) {
    if (initial_covariance.rows() != 4 || initial_covariance.cols() != 4) {
      throw ScenarioError("scenario: initial_covariance must be 4x4");
    }
    Gaussian(Vector::Zero(4), initial_covariance);
  }
}

Scenario accuracy_scenario() {
  Scenario s;
  const Matrix sigma = Vector::Constant(4, 100.0).asDiagonal();
  std::vector<BirthLocation> sites;
  for (const auto& [x, y] : {std::pair{-80.0, -20.0}, {-20.0, 80.0}, {0.0, 0.0}, {40.0, -60.0}}) {
    Vector mu(4);
    mu << x, y, 0.0, 0.0;
    sites.push_back({0.03, Gaussian(mu, sigma)});
  }
  s.birth = BirthModel(std::move(sites));
  s.sensors = {{position_sensor(4.0), 0.67, 20.0, s.region.area()}, {position_sensor(1.0), 0.75, 20.0, s.region.area()}};
  s.initial_covariance = sigma;
  return s;
}

Scenario scaling_scenario(int objects, int duration, std::uint64_t seed) {
  Scenario s;
  s.duration = duration;
  s.dt = 0.02;
  s.region = {-500.0, 500.0, -500.0, 500.0};
  s.seed = seed;
  s.fixed_cardinality = true;
  const Matrix sigma = Vector::Constant(4, 100.0).asDiagonal();
  Rng layout(stream_seed(seed, kBirthLayoutStream));
  std::uniform_real_distribution<double> ux(s.region.x_min, s.region.x_max);
  std::uniform_real_distribution<double> uy(s.region.y_min, s.region.y_max);
  std::vector<BirthLocation> sites;
  for (int i = 0; i < objects; ++i) {
    Vector mu = Vector::Zero(4);
    mu(0) = ux(layout);
    mu(1) = uy(layout);
    sites.push_back({0.03, Gaussian(mu, sigma)});
  }
  s.birth = BirthModel(std::move(sites));
  s.sensors = {{position_sensor(4.0), 1.0, 20.0, s.region.area()}};
  s.initial_covariance = sigma;
  return s;
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario: malformed JSON: ") + e.what());
  }
  try {
    Scenario s;
    s.duration = j.value("duration", s.duration);
    s.dt = j.value("dt", s.dt);
    s.process_intensity = j.value("process_intensity", s.process_intensity);
    s.survival = j.value("survival", s.survival);
    s.seed = j.value("seed", s.seed);
    s.fixed_cardinality = j.value("fixed_cardinality", false);
    if (j.contains("truth_seed")) s.truth_seed = j.at("truth_seed").get<std::uint64_t>();
    if (j.contains("region")) {
      const auto& r = j.at("region");
      s.region = {r.at("x_min").get<double>(), r.at("x_max").get<double>(), r.at("y_min").get<double>(),
                  r.at("y_max").get<double>()};
    }

    std::vector<BirthLocation> sites;
    for (const auto& b : j.value("birth", json::array())) {
      sites.push_back({b.at("existence").get<double>(), Gaussian(to_vector(b.at("mean")), covariance_from(b, "birth"))});
    }
    if (j.contains("random_births")) {
      // Sites uniform over the region with zero mean velocity, drawn from the scenario seed.
      const auto& rb = j.at("random_births");
      const Matrix cov = covariance_from(rb, "random_births");
      Rng layout(stream_seed(s.seed, kBirthLayoutStream));
      std::uniform_real_distribution<double> ux(s.region.x_min, s.region.x_max);
      std::uniform_real_distribution<double> uy(s.region.y_min, s.region.y_max);
      const int count = rb.at("count").get<int>();
      for (int i = 0; i < count; ++i) {
        Vector mu = Vector::Zero(4);
        mu(0) = ux(layout);
        mu(1) = uy(layout);
        sites.push_back({rb.at("existence").get<double>(), Gaussian(mu, cov)});
      }
    }
    s.birth = BirthModel(std::move(sites));

    for (const auto& sj : j.value("sensors", json::array())) s.sensors.push_back(sensor_from(sj, s.region));
    for (const auto& x : j.value("initial_objects", json::array())) s.initial_objects.push_back(to_vector(x));
    if (j.contains("initial_covariance")) {
      s.initial_covariance = to_matrix(j.at("initial_covariance"));
    } else if (j.contains("initial_std")) {
      s.initial_covariance = to_vector(j.at("initial_std")).array().square().matrix().asDiagonal();
    } else {
      s.initial_covariance = Vector::Constant(4, 100.0).asDiagonal();
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  } catch (const DimensionError& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  } catch (const NotPositiveDefinite& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return scenario_from_json(buffer.str());
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["duration"] = s.duration;
  j["dt"] = s.dt;
  j["process_intensity"] = s.process_intensity;
  j["survival"] = s.survival;
  j["seed"] = s.seed;
  j["fixed_cardinality"] = s.fixed_cardinality;
  if (s.truth_seed) j["truth_seed"] = *s.truth_seed;
  j["region"] = {{"x_min", s.region.x_min}, {"x_max", s.region.x_max}, {"y_min", s.region.y_min}, {"y_max", s.region.y_max}};
  j["birth"] = json::array();
  for (const auto& b : s.birth.locations()) {
    j["birth"].push_back({{"existence", b.existence}, {"mean", from_vector(b.spatial.mean())},
                          {"cov", from_matrix(b.spatial.covariance())}});
  }
  j["sensors"] = json::array();
  for (const auto& sensor : s.sensors) {
    j["sensors"].push_back({{"detection", sensor.detection}, {"clutter_rate", sensor.clutter_rate},
                            {"matrix", from_matrix(sensor.map.matrix())}, {"noise", from_matrix(sensor.map.noise())}});
  }
  j["initial_objects"] = json::array();
  for (const auto& x : s.initial_objects) j["initial_objects"].push_back(from_vector(x));
  if (s.initial_covariance.size() > 0) j["initial_covariance"] = from_matrix(s.initial_covariance);
  return j.dump(2);
}

std::vector<Vector> measurement_values(const std::vector<Measurement>& scan) {
  std::vector<Vector> out;
  out.reserve(scan.size());
  for (const auto& m : scan) out.push_back(m.z);
  return out;
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

GroundTruth generate_truth(const Scenario& scenario, Rng& rng) {
  scenario.validate();
  const auto motion = scenario.motion();
  const Matrix process_root = sqrt_psd(motion.map.noise());
  std::vector<Matrix> birth_roots;
  for (const auto& b : scenario.birth.locations()) birth_roots.push_back(sqrt_psd(b.spatial.covariance()));

  GroundTruth truth;
  truth.steps.resize(static_cast<std::size_t>(scenario.duration));
  std::vector<TruthObject> live;
  const auto num_sites = static_cast<std::uint32_t>(scenario.birth.size());

  for (int k = 0; k < scenario.duration; ++k) {
    const auto step = static_cast<std::uint32_t>(k);
    if (k > 0) {
      std::vector<TruthObject> next;
      for (auto& obj : live) {
        if (!scenario.fixed_cardinality && !bernoulli(scenario.survival, rng)) continue;
        next.push_back({obj.label, motion.map.matrix() * obj.state + process_root * standard_normal(4, rng)});
      }
      live = std::move(next);
    }
    const bool births_now = !scenario.fixed_cardinality || k == 0;
    if (births_now) {
      for (std::uint32_t b = 0; b < num_sites; ++b) {
        const auto& site = scenario.birth.locations()[b];
        if (!scenario.fixed_cardinality && !bernoulli(site.existence, rng)) continue;
        const Label label{step, b + 1};
        live.push_back({label, site.spatial.mean() + birth_roots[b] * standard_normal(4, rng)});
        truth.initial_prior.emplace(label, site.spatial);
      }
    }
    if (k == 0) {
      for (std::size_t i = 0; i < scenario.initial_objects.size(); ++i) {
        const Label label{0, num_sites + 1 + static_cast<std::uint32_t>(i)};
        live.push_back({label, scenario.initial_objects[i]});
        truth.initial_prior.emplace(label, Gaussian(scenario.initial_objects[i], scenario.initial_covariance));
      }
    }
    truth.steps[static_cast<std::size_t>(k)] = live;
  }
  return truth;
}

MeasurementFrame generate_measurements(const GroundTruth& truth, const SensorModel& sensor, const Region& region,
                                       Rng& rng) {
  sensor.validate();
  if (sensor.clutter_rate > 0.0 && sensor.map.output_dim() != 2) {
    throw ScenarioError("generate_measurements: clutter needs 2-dimensional measurements");
  }
  const Matrix noise_root = sqrt_psd(sensor.map.noise());
  const Eigen::Index dz = sensor.map.output_dim();
  std::uniform_real_distribution<double> ux(region.x_min, region.x_max);
  std::uniform_real_distribution<double> uy(region.y_min, region.y_max);

  MeasurementFrame frame;
  frame.steps.reserve(truth.steps.size());
  for (const auto& objects : truth.steps) {
    std::vector<Measurement> scan;
    for (const auto& obj : objects) {
      if (!bernoulli(sensor.detection, rng)) continue;
      scan.push_back({sensor.map.matrix() * obj.state + noise_root * standard_normal(dz, rng), obj.label});
    }
    if (sensor.clutter_rate > 0.0) {
      const int clutter = std::poisson_distribution<int>(sensor.clutter_rate)(rng);
      for (int c = 0; c < clutter; ++c) {
        Vector z(2);
        z(0) = ux(rng);
        z(1) = uy(rng);
        scan.push_back({std::move(z), std::nullopt});
      }
    }
    std::shuffle(scan.begin(), scan.end(), rng);
    frame.steps.push_back(std::move(scan));
  }
  return frame;
}

Simulation simulate(const Scenario& scenario, std::uint64_t seed) {
  Simulation sim;
  Rng truth_rng(stream_seed(scenario.truth_seed.value_or(seed), 0));
  sim.truth = generate_truth(scenario, truth_rng);
  for (std::size_t s = 0; s < scenario.sensors.size(); ++s) {
    Rng sensor_rng(stream_seed(seed, s + 1));
    sim.sensors.push_back(generate_measurements(sim.truth, scenario.sensors[s], scenario.region, sensor_rng));
  }
  return sim;
}

void write_truth_csv(const GroundTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << "step,label,px,py,vx,vy\n";
  for (std::size_t k = 0; k < truth.steps.size(); ++k) {
    for (const auto& obj : truth.steps[k]) {
      out << k << ',' << obj.label.birth_time << ':' << obj.label.index;
      for (Eigen::Index i = 0; i < obj.state.size(); ++i) out << ',' << obj.state(i);
      out << '\n';
    }
  }
}

void write_measurements_csv(const Simulation& sim, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << "step,sensor,z1,z2\n";
  for (std::size_t s = 0; s < sim.sensors.size(); ++s) {
    const auto& steps = sim.sensors[s].steps;
    for (std::size_t k = 0; k < steps.size(); ++k) {
      for (const auto& m : steps[k]) {
        out << k << ',' << s;
        for (Eigen::Index i = 0; i < m.z.size(); ++i) out << ',' << m.z(i);
        out << '\n';
      }
    }
  }
}

}  // namespace mslmb
