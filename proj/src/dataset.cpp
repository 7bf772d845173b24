#include "probe/dataset.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace probe {

bool Dataset::has_images() const {
  return std::any_of(frames.begin(), frames.end(),
                     [](const Frame& f) { return !f.image_path.empty(); });
}

std::vector<ImuSample> Dataset::imu_window(double t_a, double t_b) const {
  std::vector<ImuSample> out;
  for (const TimedImu& s : imu) {
    if (s.t >= t_a && s.t < t_b) out.push_back(s.sample);
  }
  return out;
}

std::optional<Vec3> Dataset::ground_truth_at(double t) const {
  if (ground_truth.empty()) return std::nullopt;
  double best_dt = std::numeric_limits<double>::infinity();
  Vec3 best = Vec3::Zero();
  for (const auto& g : ground_truth) {
    const double dt = std::abs(g.t - t);
    if (dt < best_dt) {
      best_dt = dt;
      best = g.position;
    }
  }
  if (best_dt > 0.5 / frame_rate + 1e-9) return std::nullopt;
  return best;
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               const std::string& header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) {
    throw IoError("unexpected CSV header in " + path + ": got '" + line +
                  "', want '" + header + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_csv_row(line));
  }
  return rows;
}

double to_double(const std::string& s, const std::string& path) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw IoError("bad numeric field '" + s + "' in " + path);
  }
}

std::string frame_image_name(int index) {
  std::ostringstream ss;
  ss << std::setw(6) << std::setfill('0') << index << ".pgm";
  return ss.str();
}

} // namespace

Dataset load_dataset(const std::string& dir) {
  Dataset ds;
  const fs::path root(dir);
  if (!fs::is_directory(root)) {
    throw IoError("dataset directory does not exist: " + dir);
  }

  {
    std::ifstream in(root / "calib.json");
    if (!in) throw IoError("missing calib.json in " + dir);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw IoError("invalid calib.json in " + dir + ": " + e.what());
    }
    for (const char* key :
         {"f", "b", "c_u", "c_v", "image_width", "image_height"}) {
      if (!j.contains(key)) {
        throw IoError(std::string("calib.json missing field: ") + key);
      }
    }
    ds.cam.f = j["f"].get<double>();
    ds.cam.b = j["b"].get<double>();
    ds.cam.c_u = j["c_u"].get<double>();
    ds.cam.c_v = j["c_v"].get<double>();
    ds.cam.image_width = j["image_width"].get<int>();
    ds.cam.image_height = j["image_height"].get<int>();
    if (!ds.cam.valid()) throw IoError("invalid camera in calib.json");
    ds.frame_rate = j.value("frame_rate", 10.0);
    ds.camera_id = j.value("camera_id", std::string("unknown"));
    if (j.contains("C_cv")) {
      const auto arr = j["C_cv"].get<std::vector<double>>();
      if (arr.size() != 9) throw IoError("calib.json C_cv must have 9 entries");
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) ds.rig.C_cv(r, c) = arr[r * 3 + c];
      }
      const Mat3& C = ds.rig.C_cv;
      if ((C.transpose() * C - Mat3::Identity()).norm() > 1e-6 ||
          std::abs(C.determinant() - 1.0) > 1e-6) {
        throw IoError("calib.json C_cv is not a rotation matrix");
      }
    }
  }

  {
    const auto rows = read_csv((root / "imu.csv").string(), "t,wx,wy,wz,ax,ay,az");
    const std::string path = (root / "imu.csv").string();
    for (const auto& r : rows) {
      if (r.size() != 7) throw IoError("bad imu.csv row in " + dir);
      TimedImu s;
      s.t = to_double(r[0], path);
      s.sample.omega = Vec3(to_double(r[1], path), to_double(r[2], path),
                            to_double(r[3], path));
      s.sample.accel = Vec3(to_double(r[4], path), to_double(r[5], path),
                            to_double(r[6], path));
      ds.imu.push_back(s);
    }
    // sample period from consecutive timestamps
    for (size_t i = 0; i < ds.imu.size(); ++i) {
      if (i + 1 < ds.imu.size()) {
        ds.imu[i].sample.dt = ds.imu[i + 1].t - ds.imu[i].t;
      } else if (i > 0) {
        ds.imu[i].sample.dt = ds.imu[i - 1].sample.dt;
      } else {
        ds.imu[i].sample.dt = 1.0 / 200.0;
      }
      if (!(ds.imu[i].sample.dt > 0.0)) {
        throw IoError("non-increasing IMU timestamps in " + dir);
      }
    }
  }

  {
    const std::string path = (root / "tracks.csv").string();
    const auto rows = read_csv(path, "frame_idx,track_id,ul,vl,ur,vr");
    std::map<int, Frame> frames;
    for (const auto& r : rows) {
      if (r.size() != 6) throw IoError("bad tracks.csv row in " + dir);
      const int idx = static_cast<int>(to_double(r[0], path));
      TrackedFeature f;
      f.track_id = static_cast<int>(to_double(r[1], path));
      f.y = {to_double(r[2], path), to_double(r[3], path),
             to_double(r[4], path), to_double(r[5], path)};
      frames[idx].features.push_back(f);
    }
    for (auto& [idx, frame] : frames) {
      frame.index = idx;
      frame.t = idx / ds.frame_rate;
      const fs::path img = root / "images" / frame_image_name(idx);
      if (fs::exists(img)) frame.image_path = img.string();
      ds.frames.push_back(std::move(frame));
    }
  }

  if (fs::exists(root / "groundtruth.csv")) {
    const std::string path = (root / "groundtruth.csv").string();
    const auto rows = read_csv(path, "t,x,y,z");
    for (const auto& r : rows) {
      if (r.size() != 4) throw IoError("bad groundtruth.csv row in " + dir);
      ds.ground_truth.push_back(
          {to_double(r[0], path), Vec3(to_double(r[1], path),
                                       to_double(r[2], path),
                                       to_double(r[3], path))});
    }
  }

  if (fs::exists(root / "predictors.csv")) {
    const std::string path = (root / "predictors.csv").string();
    const auto rows = read_csv(
        path, "frame_idx,track_id,w_mag,a_mag,entropy,blur,flow_var,f_low,f_high");
    for (const auto& r : rows) {
      if (r.size() != 9) throw IoError("bad predictors.csv row in " + dir);
      PredictorVector pi;
      for (int i = 0; i < kPredictorDim; ++i) pi[i] = to_double(r[i + 2], path);
      ds.predictors[{static_cast<int>(to_double(r[0], path)),
                     static_cast<int>(to_double(r[1], path))}] = pi;
    }
  }

  if (fs::exists(root / "labels.csv")) {
    const std::string path = (root / "labels.csv").string();
    const auto rows = read_csv(path, "frame_idx,track_id,label");
    for (const auto& r : rows) {
      if (r.size() != 3) throw IoError("bad labels.csv row in " + dir);
      FeatureLabel label;
      if (r[2] == "static") label = FeatureLabel::static_point;
      else if (r[2] == "moving") label = FeatureLabel::moving;
      else if (r[2] == "outlier") label = FeatureLabel::outlier;
      else throw IoError("unknown label '" + r[2] + "' in " + dir);
      ds.labels[{static_cast<int>(to_double(r[0], path)),
                 static_cast<int>(to_double(r[1], path))}] = label;
    }
  }

  return ds;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (!fs::is_directory(root)) {
    throw IoError("cannot create dataset directory: " + dir);
  }

  {
    json j;
    j["f"] = ds.cam.f;
    j["b"] = ds.cam.b;
    j["c_u"] = ds.cam.c_u;
    j["c_v"] = ds.cam.c_v;
    j["image_width"] = ds.cam.image_width;
    j["image_height"] = ds.cam.image_height;
    j["frame_rate"] = ds.frame_rate;
    j["camera_id"] = ds.camera_id;
    std::vector<double> ccv(9);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) ccv[r * 3 + c] = ds.rig.C_cv(r, c);
    }
    j["C_cv"] = ccv;
    std::ofstream out(root / "calib.json");
    if (!out) throw IoError("cannot write calib.json in " + dir);
    out << j.dump(2) << "\n";
  }

  auto open_csv = [&root, &dir](const char* name, const char* header) {
    std::ofstream out(root / name);
    if (!out) throw IoError(std::string("cannot write ") + name + " in " + dir);
    out << std::setprecision(17);
    out << header << "\n";
    return out;
  };

  {
    auto out = open_csv("imu.csv", "t,wx,wy,wz,ax,ay,az");
    for (const auto& s : ds.imu) {
      out << s.t << "," << s.sample.omega.x() << "," << s.sample.omega.y()
          << "," << s.sample.omega.z() << "," << s.sample.accel.x() << ","
          << s.sample.accel.y() << "," << s.sample.accel.z() << "\n";
    }
  }
  {
    auto out = open_csv("tracks.csv", "frame_idx,track_id,ul,vl,ur,vr");
    for (const auto& f : ds.frames) {
      for (const auto& feat : f.features) {
        out << f.index << "," << feat.track_id << "," << feat.y.u_l << ","
            << feat.y.v_l << "," << feat.y.u_r << "," << feat.y.v_r << "\n";
      }
    }
  }
  if (!ds.ground_truth.empty()) {
    auto out = open_csv("groundtruth.csv", "t,x,y,z");
    for (const auto& g : ds.ground_truth) {
      out << g.t << "," << g.position.x() << "," << g.position.y() << ","
          << g.position.z() << "\n";
    }
  }
  if (!ds.predictors.empty()) {
    auto out = open_csv(
        "predictors.csv",
        "frame_idx,track_id,w_mag,a_mag,entropy,blur,flow_var,f_low,f_high");
    for (const auto& [key, pi] : ds.predictors) {
      out << key.first << "," << key.second;
      for (int i = 0; i < kPredictorDim; ++i) out << "," << pi[i];
      out << "\n";
    }
  }
  if (!ds.labels.empty()) {
    auto out = open_csv("labels.csv", "frame_idx,track_id,label");
    for (const auto& [key, label] : ds.labels) {
      const char* name = label == FeatureLabel::static_point ? "static"
                         : label == FeatureLabel::moving     ? "moving"
                                                             : "outlier";
      out << key.first << "," << key.second << "," << name << "\n";
    }
  }
}

} // namespace probe
