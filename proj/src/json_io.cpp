#include "isoscope/json_io.hpp"

namespace isoscope {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

int get_int(const json& j, const char* key) {
  if (!j.contains(key)) bad(std::string("missing key \"") + key + "\"");
  if (!j[key].is_number_integer()) bad(std::string("key \"") + key + "\" must be an integer");
  return j[key].get<int>();
}

double get_num(const json& j, const char* key, std::optional<double> dflt = {}) {
  if (!j.contains(key)) {
    if (dflt) return *dflt;
    bad(std::string("missing key \"") + key + "\"");
  }
  if (!j[key].is_number()) bad(std::string("key \"") + key + "\" must be a number");
  return j[key].get<double>();
}

const json& get_obj(const json& j, const char* key) {
  if (!j.contains(key)) bad(std::string("missing key \"") + key + "\"");
  return j[key];
}

}  // namespace

Mat mat_from_json(const json& j, const char* key) {
  const json& a = get_obj(j, key);
  if (!a.is_array() || a.empty()) bad(std::string("key \"") + key + "\" must be a non-empty array");
  // scalar shorthand: uniform scaling
  if (a.is_array() && a[0].is_number()) bad(std::string("key \"") + key + "\" must be an array of rows");
  const int rows = static_cast<int>(a.size());
  const int cols = static_cast<int>(a[0].size());
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(a[i].size()) != cols) bad(std::string("ragged matrix in \"") + key + "\"");
    for (int c = 0; c < cols; ++c) m(i, c) = a[i][c].get<double>();
  }
  return m;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (int c = 0; c < m.cols(); ++c) r.push_back(m(i, c));
    rows.push_back(std::move(r));
  }
  return rows;
}

Vec vec_from_json(const json& j, const char* key) {
  const json& a = get_obj(j, key);
  if (!a.is_array()) bad(std::string("key \"") + key + "\" must be an array");
  Vec v(a.size());
  for (int i = 0; i < static_cast<int>(a.size()); ++i) v[i] = a[i].get<double>();
  return v;
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

namespace {

// "T": 2.5 means 2.5 * identity for the child dimension
Mat square_matrix_arg(const json& j, const char* key, int n) {
  const json& a = get_obj(j, key);
  if (a.is_number()) return a.get<double>() * Mat::Identity(n, n);
  return mat_from_json(j, key);
}

}  // namespace

BodyPtr body_from_json(const json& j) {
  if (!j.is_object()) bad("body specification must be a JSON object");
  if (!j.contains("type")) bad("body: missing key \"type\"");
  const std::string type = j["type"].get<std::string>();

  if (type == "cube") return BodyDesc::cube(get_int(j, "n"));
  if (type == "ball") return BodyDesc::ball(get_int(j, "n"), get_num(j, "r", 1.0));
  if (type == "volume_one_ball") return BodyDesc::volume_one_ball(get_int(j, "n"));
  if (type == "cross") {
    const int n = get_int(j, "n");
    if (j.contains("scale")) return BodyDesc::cross_polytope(n, get_num(j, "scale"));
    return BodyDesc::cross_polytope_volume_one(n);
  }
  if (type == "simplex") return BodyDesc::simplex(get_int(j, "n"));
  if (type == "lpball")
    return BodyDesc::lp_ball(get_int(j, "n"), get_num(j, "p"), get_num(j, "scale", 1.0));
  if (type == "hpolytope")
    return BodyDesc::hpolytope(mat_from_json(j, "A"), vec_from_json(j, "b"));
  if (type == "ellipsoid") return BodyDesc::ellipsoid(mat_from_json(j, "shape"));
  if (type == "affine") {
    BodyPtr child = body_from_json(get_obj(j, "child"));
    return BodyDesc::affine(square_matrix_arg(j, "T", child->n), child);
  }
  if (type == "polar") return BodyDesc::polar(body_from_json(get_obj(j, "child")));
  if (type == "section" || type == "projection") {
    BodyPtr child = body_from_json(get_obj(j, "child"));
    Subspace F(mat_from_json(j, "frame"));
    return type == "section" ? BodyDesc::section(child, F)
                             : BodyDesc::projection(child, F);
  }
  if (type == "intersection")
    return BodyDesc::intersection(body_from_json(get_obj(j, "a")),
                                  body_from_json(get_obj(j, "b")));
  if (type == "rotation") {
    BodyPtr child = body_from_json(get_obj(j, "child"));
    return BodyDesc::rotation(square_matrix_arg(j, "U", child->n), child);
  }
  bad("unknown body type \"" + type + "\"");
}

json body_to_json(const BodyPtr& d) {
  json j;
  switch (d->kind) {
    case BodyKind::Cube: j = {{"type", "cube"}, {"n", d->n}}; break;
    case BodyKind::Ball: j = {{"type", "ball"}, {"n", d->n}, {"r", d->radius}}; break;
    case BodyKind::VolumeOneBall: j = {{"type", "volume_one_ball"}, {"n", d->n}}; break;
    case BodyKind::CrossPolytope:
      j = {{"type", "cross"}, {"n", d->n}, {"scale", d->scale}};
      break;
    case BodyKind::Simplex: j = {{"type", "simplex"}, {"n", d->n}}; break;
    case BodyKind::LpBall:
      j = {{"type", "lpball"}, {"n", d->n}, {"p", d->p}, {"scale", d->scale}};
      break;
    case BodyKind::HPolytope:
      j = {{"type", "hpolytope"}, {"A", mat_to_json(d->A)}, {"b", vec_to_json(d->b)}};
      break;
    case BodyKind::Ellipsoid:
      j = {{"type", "ellipsoid"}, {"shape", mat_to_json(d->M)}};
      break;
    case BodyKind::Affine:
      j = {{"type", "affine"}, {"T", mat_to_json(d->M)}, {"child", body_to_json(d->child)}};
      break;
    case BodyKind::Polar:
      j = {{"type", "polar"}, {"child", body_to_json(d->child)}};
      break;
    case BodyKind::Section:
      j = {{"type", "section"}, {"frame", mat_to_json(d->M)},
           {"child", body_to_json(d->child)}};
      break;
    case BodyKind::Projection:
      j = {{"type", "projection"}, {"frame", mat_to_json(d->M)},
           {"child", body_to_json(d->child)}};
      break;
    case BodyKind::Intersection:
      j = {{"type", "intersection"}, {"a", body_to_json(d->child)},
           {"b", body_to_json(d->child2)}};
      break;
    case BodyKind::Rotation:
      j = {{"type", "rotation"}, {"U", mat_to_json(d->M)},
           {"child", body_to_json(d->child)}};
      break;
  }
  return j;
}

MeasurePtr measure_from_json(const json& j) {
  if (!j.is_object()) bad("measure specification must be a JSON object");
  if (!j.contains("type")) bad("measure: missing key \"type\"");
  const std::string type = j["type"].get<std::string>();

  if (type == "uniform") {
    BodyPtr body = body_from_json(get_obj(j, "body"));
    const int burn = j.value("burn_in", -1);
    const int thin = j.value("thinning", -1);
    return MeasureDesc::uniform_on(body, burn, thin);
  }
  if (type == "gaussian") return MeasureDesc::gaussian(get_int(j, "n"));
  if (type == "laplace") return MeasureDesc::laplace(get_int(j, "n"));
  if (type == "pushforward") {
    MeasurePtr child = measure_from_json(get_obj(j, "child"));
    return MeasureDesc::pushforward(square_matrix_arg(j, "T", child->n), child);
  }
  if (type == "marginal") {
    MeasurePtr child = measure_from_json(get_obj(j, "child"));
    return MeasureDesc::marginal(child, Subspace(mat_from_json(j, "frame")));
  }
  if (type == "mu_k") {
    // isotropic measure of a volume-one body with closed-form L_K
    BodyPtr body = body_from_json(get_obj(j, "body"));
    return isotropic_body_measure(body).descriptor();
  }
  bad("unknown measure type \"" + type + "\"");
}

json measure_to_json(const MeasurePtr& d) {
  json j;
  switch (d->kind) {
    case MeasureKind::UniformOnBody:
      j = {{"type", "uniform"}, {"body", body_to_json(d->body)}};
      if (d->burn_in >= 0) j["burn_in"] = d->burn_in;
      if (d->thinning >= 0) j["thinning"] = d->thinning;
      break;
    case MeasureKind::StandardGaussian: j = {{"type", "gaussian"}, {"n", d->n}}; break;
    case MeasureKind::LaplaceProduct: j = {{"type", "laplace"}, {"n", d->n}}; break;
    case MeasureKind::Pushforward:
      j = {{"type", "pushforward"}, {"T", mat_to_json(d->T)},
           {"child", measure_to_json(d->child)}};
      break;
    case MeasureKind::Marginal:
      j = {{"type", "marginal"}, {"frame", mat_to_json(d->frame)},
           {"child", measure_to_json(d->child)}};
      break;
  }
  return j;
}

}  // namespace isoscope
