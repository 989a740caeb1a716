#include "oed/surrogate.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <utility>

#include "json.hpp"

namespace oed {

namespace {

constexpr double kDomainTol = 1e-12;

std::vector<std::uint64_t> design_key(const Eigen::VectorXd& d) {
  std::vector<std::uint64_t> key(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    std::uint64_t bits = 0;
    const double v = d[i];
    std::memcpy(&bits, &v, sizeof(bits));
    key[static_cast<std::size_t>(i)] = bits;
  }
  return key;
}

// Maps t through the clamped unit interval; throws if t is outside [0,1]
// beyond a rounding-slack tolerance. what names the offending coordinate.
double clamp_unit(double t, const char* what) {
  if (!(t >= -kDomainTol && t <= 1.0 + kDomainTol))
    throw std::invalid_argument(std::string(what) +
                                " outside the surrogate domain");
  return std::min(1.0, std::max(0.0, t));
}

// --- sparse-grid machinery ------------------------------------------------

// Coordinate in [0,1] of node `index` of the level-`level` 1D grid. The
// level-0 grid is the single midpoint; level l >= 1 has 2^l + 1 equidistant
// nodes index/2^l. All coordinates are exact dyadic rationals, so rebuilding
// them from (level, index) is bit-reproducible.
double node_coord(int level, int index) {
  if (level == 0) return 0.5;
  return std::ldexp(static_cast<double>(index), -level);
}

// Hierarchical hat function for node (level, index) evaluated at t in [0,1].
// Level 0 is the constant function; level 1 contributes the two boundary
// half-hats; level >= 2 contributes hats of support radius 2^-level centered
// at odd-index nodes.
double hat1d(int level, int index, double t) {
  if (level == 0) return 1.0;
  if (level == 1) {
    if (index == 0) return std::max(0.0, 1.0 - 2.0 * t);
    return std::max(0.0, 2.0 * t - 1.0);
  }
  const double scaled = std::ldexp(t, level);
  return std::max(0.0, 1.0 - std::abs(scaled - static_cast<double>(index)));
}

// Indices of the nodes that level `level` adds on top of all lower levels.
std::vector<int> new_indices(int level) {
  if (level == 0) return {0};
  if (level == 1) return {0, 2};
  std::vector<int> out;
  out.reserve(std::size_t(1) << (level - 1));
  for (int j = 1; j < (1 << level); j += 2) out.push_back(j);
  return out;
}

double sparse_basis_value(const SparseGridNode& node,
                          const Eigen::VectorXd& unit) {
  double phi = 1.0;
  for (Eigen::Index k = 0; k < unit.size() && phi != 0.0; ++k)
    phi *= hat1d(node.level[k], node.index[k], unit[k]);
  return phi;
}

Eigen::VectorXd sparse_eval_unit(const SparseMultilinearData& data,
                                 int data_dim, const Eigen::VectorXd& unit) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(data_dim);
  for (const SparseGridNode& node : data.nodes) {
    const double phi = sparse_basis_value(node, unit);
    if (phi != 0.0) acc += phi * node.surplus;
  }
  return acc;
}

Eigen::VectorXd to_unit(const SparseMultilinearData& data,
                        const Eigen::VectorXd& p) {
  Eigen::VectorXd unit(p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k)
    unit[k] = clamp_unit((p[k] - data.lower[k]) / (data.upper[k] - data.lower[k]),
                         "input coordinate");
  return unit;
}

ObservationFn make_sparse_eval(std::shared_ptr<const SparseMultilinearData> data,
                               int param_dim, int design_dim, int data_dim) {
  return [data, param_dim, design_dim, data_dim](
             const Eigen::VectorXd& x,
             const Eigen::VectorXd& d) -> Eigen::VectorXd {
    if (x.size() != param_dim || d.size() != design_dim)
      throw std::invalid_argument("surrogate input dimension mismatch");
    Eigen::VectorXd p(param_dim + design_dim);
    p.head(param_dim) = x;
    p.tail(design_dim) = d;
    return sparse_eval_unit(*data, data_dim, to_unit(*data, p));
  };
}

// Enumerates all per-axis level vectors with the given 1-norm in
// lexicographic order and calls fn on each.
void for_each_multilevel(int dim, int total, Eigen::VectorXi& scratch, int axis,
                         const std::function<void(const Eigen::VectorXi&)>& fn) {
  if (axis == dim - 1) {
    scratch[axis] = total;
    fn(scratch);
    return;
  }
  for (int l = 0; l <= total; ++l) {
    scratch[axis] = l;
    for_each_multilevel(dim, total - l, scratch, axis + 1, fn);
  }
}

// --- Legendre machinery ----------------------------------------------------

void shifted_legendre_table(int kmax, double t, double* out) {
  const double z = 2.0 * t - 1.0;
  double pm1 = 1.0;  // P_0
  out[0] = 1.0;
  if (kmax == 0) return;
  double p = z;  // P_1
  out[1] = std::sqrt(3.0) * p;
  for (int k = 1; k < kmax; ++k) {
    const double pp1 = ((2.0 * k + 1.0) * z * p - k * pm1) / (k + 1.0);
    pm1 = p;
    p = pp1;
    out[k + 1] = std::sqrt(2.0 * (k + 1) + 1.0) * p;
  }
}

Eigen::VectorXd pce_eval_unit(const PceData& data, int data_dim,
                              const Eigen::VectorXd& unit) {
  const int dim = static_cast<int>(unit.size());
  const int deg = data.degree;
  Eigen::MatrixXd table(deg + 1, dim);
  for (int k = 0; k < dim; ++k)
    shifted_legendre_table(deg, unit[k], table.col(k).data());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(data_dim);
  for (std::size_t j = 0; j < data.multi_index.size(); ++j) {
    const Eigen::VectorXi& mi = data.multi_index[j];
    double phi = 1.0;
    for (int k = 0; k < dim; ++k) phi *= table(mi[k], k);
    acc += phi * data.coeffs.col(static_cast<Eigen::Index>(j));
  }
  return acc;
}

Eigen::VectorXd pce_to_unit(const PceData& data, const Eigen::VectorXd& p) {
  Eigen::VectorXd unit(p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k)
    unit[k] = clamp_unit((p[k] - data.lower[k]) / (data.upper[k] - data.lower[k]),
                         "input coordinate");
  return unit;
}

ObservationFn make_pce_eval(std::shared_ptr<const PceData> data, int param_dim,
                            int design_dim, int data_dim) {
  return [data, param_dim, design_dim, data_dim](
             const Eigen::VectorXd& x,
             const Eigen::VectorXd& d) -> Eigen::VectorXd {
    if (x.size() != param_dim || d.size() != design_dim)
      throw std::invalid_argument("surrogate input dimension mismatch");
    Eigen::VectorXd p(param_dim + design_dim);
    p.head(param_dim) = x;
    p.tail(design_dim) = d;
    return pce_eval_unit(*data, data_dim, pce_to_unit(*data, p));
  };
}

void append_total_degree(int dim, int degree, Eigen::VectorXi& scratch,
                         int axis, int used,
                         std::vector<Eigen::VectorXi>& out) {
  if (axis == dim) {
    out.push_back(scratch);
    return;
  }
  for (int k = 0; k + used <= degree; ++k) {
    scratch[axis] = k;
    append_total_degree(dim, degree, scratch, axis + 1, used + k, out);
  }
}

void check_box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
               int dim) {
  if (lower.size() != dim || upper.size() != dim)
    throw std::invalid_argument("box dimension mismatch");
  for (int k = 0; k < dim; ++k)
    if (!(lower[k] < upper[k]))
      throw std::invalid_argument("degenerate box axis");
}

}  // namespace

// --- piecewise linear in x ---------------------------------------------------

const Eigen::MatrixXd& PlxData::knot_values(const Eigen::VectorXd& d) const {
  const std::vector<std::uint64_t> key = design_key(d);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const int n = n_intervals;
  Eigen::MatrixXd values(model.data_dim, n + 1);
  Eigen::VectorXd x(1);
  for (int k = 0; k <= n; ++k) {
    x[0] = static_cast<double>(k) / static_cast<double>(n);
    values.col(k) = model(x, d);
  }
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.emplace(key, std::move(values)).first->second;
}

Surrogate build_pl_x(const ForwardModel& model, int n_intervals) {
  if (n_intervals < 1)
    throw std::invalid_argument("build_pl_x requires n_intervals >= 1");
  if (model.param_dim != 1)
    throw std::invalid_argument(
        "build_pl_x requires a scalar-parameter model on [0,1]");
  auto data = std::make_shared<PlxData>();
  data->n_intervals = n_intervals;
  data->model = model;

  Surrogate s;
  s.kind = SurrogateKind::PiecewiseLinearX;
  s.level_param = n_intervals;
  s.param_dim = model.param_dim;
  s.design_dim = model.design_dim;
  s.data_dim = model.data_dim;
  s.tag = "pl_x(n=" + std::to_string(n_intervals) + ",model=" + model.tag + ")";
  s.plx = data;
  const int n = n_intervals;
  s.eval = [data, n](const Eigen::VectorXd& x,
                     const Eigen::VectorXd& d) -> Eigen::VectorXd {
    if (x.size() != 1)
      throw std::invalid_argument("piecewise-linear surrogate expects scalar x");
    const double t = clamp_unit(x[0], "parameter");
    const Eigen::MatrixXd& values = data->knot_values(d);
    const double scaled = t * static_cast<double>(n);
    const int cell = std::min(n - 1, static_cast<int>(scaled));
    const double theta = scaled - static_cast<double>(cell);
    return (1.0 - theta) * values.col(cell) + theta * values.col(cell + 1);
  };
  return s;
}

// --- sparse multilinear ------------------------------------------------------

Surrogate build_sparse_multilinear(const ForwardModel& model, int level,
                                   const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper) {
  if (level < 0)
    throw std::invalid_argument("build_sparse_multilinear requires level >= 0");
  const int dim = model.param_dim + model.design_dim;
  check_box(lower, upper, dim);

  auto data = std::make_shared<SparseMultilinearData>();
  data->level = level;
  data->lower = lower;
  data->upper = upper;

  Eigen::VectorXd x(model.param_dim), d(model.design_dim), unit(dim);
  Eigen::VectorXi scratch(dim);
  for (int total = 0; total <= level; ++total) {
    for_each_multilevel(
        dim, total, scratch, 0, [&](const Eigen::VectorXi& ml) {
          std::vector<std::vector<int>> axis_indices(
              static_cast<std::size_t>(dim));
          for (int k = 0; k < dim; ++k)
            axis_indices[std::size_t(k)] = new_indices(ml[k]);
          std::vector<std::size_t> pick(std::size_t(dim), 0);
          while (true) {
            SparseGridNode node;
            node.level = ml;
            node.index.resize(dim);
            for (int k = 0; k < dim; ++k)
              node.index[k] = axis_indices[std::size_t(k)][pick[std::size_t(k)]];
            for (int k = 0; k < dim; ++k)
              unit[k] = node_coord(node.level[k], node.index[k]);
            node.unit = unit;
            for (int k = 0; k < model.param_dim; ++k)
              x[k] = lower[k] + unit[k] * (upper[k] - lower[k]);
            for (int k = 0; k < model.design_dim; ++k) {
              const int a = model.param_dim + k;
              d[k] = lower[a] + unit[a] * (upper[a] - lower[a]);
            }
            // Basis functions of the same 1-norm vanish at each other's
            // nodes, so the partial interpolant over everything pushed so
            // far only picks up strictly lower levels here.
            node.surplus =
                model(x, d) - sparse_eval_unit(*data, model.data_dim, unit);
            data->nodes.push_back(std::move(node));
            int axis = dim - 1;
            while (axis >= 0) {
              if (++pick[std::size_t(axis)] <
                  axis_indices[std::size_t(axis)].size())
                break;
              pick[std::size_t(axis)] = 0;
              --axis;
            }
            if (axis < 0) break;
          }
        });
  }

  Surrogate s;
  s.kind = SurrogateKind::SparseMultilinear;
  s.level_param = static_cast<int>(data->nodes.size());
  s.param_dim = model.param_dim;
  s.design_dim = model.design_dim;
  s.data_dim = model.data_dim;
  s.tag = "sparse_multilinear(level=" + std::to_string(level) +
          ",nodes=" + std::to_string(data->nodes.size()) +
          ",model=" + model.tag + ")";
  s.sparse = data;
  s.eval = make_sparse_eval(data, s.param_dim, s.design_dim, s.data_dim);
  return s;
}

// --- polynomial chaos --------------------------------------------------------

double shifted_legendre(int k, double t) {
  if (k < 0) throw std::invalid_argument("negative polynomial degree");
  std::vector<double> table(std::size_t(k) + 1);
  shifted_legendre_table(k, t, table.data());
  return table[std::size_t(k)];
}

std::vector<Eigen::VectorXi> total_degree_set(int input_dim, int degree) {
  if (input_dim < 1 || degree < 0)
    throw std::invalid_argument("bad multi-index set parameters");
  std::vector<Eigen::VectorXi> out;
  Eigen::VectorXi scratch(input_dim);
  append_total_degree(input_dim, degree, scratch, 0, 0, out);
  return out;
}

std::vector<Eigen::VectorXi> tensor_degree_set(int input_dim, int degree) {
  if (input_dim < 1 || degree < 0)
    throw std::invalid_argument("bad multi-index set parameters");
  std::vector<Eigen::VectorXi> out;
  Eigen::VectorXi scratch = Eigen::VectorXi::Zero(input_dim);
  while (true) {
    out.push_back(scratch);
    int axis = input_dim - 1;
    while (axis >= 0) {
      if (++scratch[axis] <= degree) break;
      scratch[axis] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  return out;
}

Surrogate build_pce(const ForwardModel& model, int degree,
                    const QuadratureRule& projection_rule,
                    const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                    PceTruncation truncation, bool use_generic_denominator) {
  if (degree < 0) throw std::invalid_argument("build_pce requires degree >= 0");
  const int dim = model.param_dim + model.design_dim;
  check_box(lower, upper, dim);
  if (projection_rule.dim != dim)
    throw std::invalid_argument("projection rule dimension mismatch");
  if (projection_rule.weight_kind != WeightKind::LebesgueOnBox)
    throw std::invalid_argument("projection rule must be a Lebesgue box rule");
  for (int k = 0; k < dim; ++k)
    if (std::abs(projection_rule.box_lower[k] - lower[k]) > 1e-12 ||
        std::abs(projection_rule.box_upper[k] - upper[k]) > 1e-12)
      throw std::invalid_argument("projection rule box differs from PCE box");

  auto data = std::make_shared<PceData>();
  data->degree = degree;
  data->truncation = truncation;
  data->lower = lower;
  data->upper = upper;
  data->multi_index = truncation == PceTruncation::TotalDegree
                          ? total_degree_set(dim, degree)
                          : tensor_degree_set(dim, degree);
  const std::size_t n_terms = data->multi_index.size();

  const Eigen::VectorXd w = probability_weights(projection_rule);
  Eigen::MatrixXd numerator =
      Eigen::MatrixXd::Zero(model.data_dim, static_cast<Eigen::Index>(n_terms));
  Eigen::VectorXd denominator =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_terms));
  Eigen::MatrixXd table(degree + 1, dim);
  Eigen::VectorXd x(model.param_dim), d(model.design_dim);
  for (Eigen::Index m = 0; m < projection_rule.size(); ++m) {
    const Eigen::VectorXd p = projection_rule.nodes.row(m);
    x = p.head(model.param_dim);
    d = p.tail(model.design_dim);
    const Eigen::VectorXd value = model(x, d);
    for (int k = 0; k < dim; ++k) {
      const double t =
          clamp_unit((p[k] - lower[k]) / (upper[k] - lower[k]), "node");
      shifted_legendre_table(degree, t, table.col(k).data());
    }
    for (std::size_t j = 0; j < n_terms; ++j) {
      const Eigen::VectorXi& mi = data->multi_index[j];
      double phi = 1.0;
      for (int k = 0; k < dim; ++k) phi *= table(mi[k], k);
      const double ww = w[m] * phi;
      numerator.col(static_cast<Eigen::Index>(j)) += ww * value;
      denominator[static_cast<Eigen::Index>(j)] += ww * phi;
    }
  }
  data->coeffs.resize(model.data_dim, static_cast<Eigen::Index>(n_terms));
  for (std::size_t j = 0; j < n_terms; ++j) {
    const Eigen::Index jj = static_cast<Eigen::Index>(j);
    if (use_generic_denominator) {
      if (!(denominator[jj] > 0.0))
        throw std::runtime_error(
            "projection rule gives a nonpositive basis normalization");
      data->coeffs.col(jj) = numerator.col(jj) / denominator[jj];
    } else {
      data->coeffs.col(jj) = numerator.col(jj);
    }
  }

  Surrogate s;
  s.kind = SurrogateKind::Pce;
  s.level_param = degree;
  s.param_dim = model.param_dim;
  s.design_dim = model.design_dim;
  s.data_dim = model.data_dim;
  s.tag = "pce(degree=" + std::to_string(degree) +
          ",terms=" + std::to_string(n_terms) + ",model=" + model.tag + ")";
  s.pce = data;
  s.eval = make_pce_eval(data, s.param_dim, s.design_dim, s.data_dim);
  return s;
}

Eigen::VectorXd Surrogate::operator()(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& d) const {
  if (!eval) throw std::logic_error("surrogate has no evaluator");
  return eval(x, d);
}

// --- serialization -----------------------------------------------------------

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json ivec_to_json(const Eigen::VectorXi& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = a[static_cast<std::size_t>(i)].get<double>();
  return v;
}

Eigen::VectorXi ivec_from_json(const json& a) {
  Eigen::VectorXi v(static_cast<Eigen::Index>(a.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = a[static_cast<std::size_t>(i)].get<int>();
  return v;
}

}  // namespace

std::string save_surrogate(const Surrogate& s) {
  json out;
  out["level_param"] = s.level_param;
  out["param_dim"] = s.param_dim;
  out["design_dim"] = s.design_dim;
  out["data_dim"] = s.data_dim;
  out["tag"] = s.tag;
  switch (s.kind) {
    case SurrogateKind::PiecewiseLinearX: {
      if (!s.plx) throw std::logic_error("missing piecewise-linear payload");
      out["kind"] = "pl_x";
      out["n_intervals"] = s.plx->n_intervals;
      out["model_tag"] = s.plx->model.tag;
      break;
    }
    case SurrogateKind::SparseMultilinear: {
      if (!s.sparse) throw std::logic_error("missing sparse-grid payload");
      out["kind"] = "sparse_multilinear";
      out["level"] = s.sparse->level;
      out["lower"] = vec_to_json(s.sparse->lower);
      out["upper"] = vec_to_json(s.sparse->upper);
      json nodes = json::array();
      for (const SparseGridNode& node : s.sparse->nodes) {
        json jn;
        jn["level"] = ivec_to_json(node.level);
        jn["index"] = ivec_to_json(node.index);
        jn["surplus"] = vec_to_json(node.surplus);
        nodes.push_back(std::move(jn));
      }
      out["nodes"] = std::move(nodes);
      break;
    }
    case SurrogateKind::Pce: {
      if (!s.pce) throw std::logic_error("missing polynomial payload");
      out["kind"] = "pce";
      out["degree"] = s.pce->degree;
      out["truncation"] = s.pce->truncation == PceTruncation::TotalDegree
                              ? "total"
                              : "tensor";
      out["lower"] = vec_to_json(s.pce->lower);
      out["upper"] = vec_to_json(s.pce->upper);
      json terms = json::array();
      for (const Eigen::VectorXi& mi : s.pce->multi_index)
        terms.push_back(ivec_to_json(mi));
      out["multi_index"] = std::move(terms);
      json coeffs = json::array();
      for (Eigen::Index j = 0; j < s.pce->coeffs.cols(); ++j)
        coeffs.push_back(vec_to_json(s.pce->coeffs.col(j)));
      out["coeffs"] = std::move(coeffs);
      break;
    }
  }
  return out.dump();
}

Surrogate load_surrogate(const std::string& text,
                         const ForwardModel* rebind_model) {
  const json in = json::parse(text);
  const std::string kind = in.at("kind").get<std::string>();
  if (kind == "pl_x") {
    if (rebind_model == nullptr)
      throw std::invalid_argument(
          "loading a piecewise-linear surrogate requires its model");
    if (rebind_model->tag != in.at("model_tag").get<std::string>())
      throw std::invalid_argument(
          "model tag does not match the saved surrogate");
    return build_pl_x(*rebind_model, in.at("n_intervals").get<int>());
  }

  Surrogate s;
  s.level_param = in.at("level_param").get<int>();
  s.param_dim = in.at("param_dim").get<int>();
  s.design_dim = in.at("design_dim").get<int>();
  s.data_dim = in.at("data_dim").get<int>();
  s.tag = in.at("tag").get<std::string>();
  if (kind == "sparse_multilinear") {
    auto data = std::make_shared<SparseMultilinearData>();
    data->level = in.at("level").get<int>();
    data->lower = vec_from_json(in.at("lower"));
    data->upper = vec_from_json(in.at("upper"));
    for (const json& jn : in.at("nodes")) {
      SparseGridNode node;
      node.level = ivec_from_json(jn.at("level"));
      node.index = ivec_from_json(jn.at("index"));
      node.surplus = vec_from_json(jn.at("surplus"));
      node.unit.resize(node.level.size());
      for (Eigen::Index k = 0; k < node.level.size(); ++k)
        node.unit[k] = node_coord(node.level[k], node.index[k]);
      data->nodes.push_back(std::move(node));
    }
    s.kind = SurrogateKind::SparseMultilinear;
    s.sparse = data;
    s.eval = make_sparse_eval(data, s.param_dim, s.design_dim, s.data_dim);
    return s;
  }
  if (kind == "pce") {
    auto data = std::make_shared<PceData>();
    data->degree = in.at("degree").get<int>();
    const std::string trunc = in.at("truncation").get<std::string>();
    if (trunc != "total" && trunc != "tensor")
      throw std::invalid_argument("unknown truncation kind: " + trunc);
    data->truncation = trunc == "total" ? PceTruncation::TotalDegree
                                        : PceTruncation::TensorDegree;
    data->lower = vec_from_json(in.at("lower"));
    data->upper = vec_from_json(in.at("upper"));
    for (const json& jm : in.at("multi_index"))
      data->multi_index.push_back(ivec_from_json(jm));
    data->coeffs.resize(s.data_dim,
                        static_cast<Eigen::Index>(data->multi_index.size()));
    const json& coeffs = in.at("coeffs");
    if (coeffs.size() != data->multi_index.size())
      throw std::invalid_argument("coefficient table size mismatch");
    for (Eigen::Index j = 0; j < data->coeffs.cols(); ++j)
      data->coeffs.col(j) =
          vec_from_json(coeffs[static_cast<std::size_t>(j)]);
    s.kind = SurrogateKind::Pce;
    s.pce = data;
    s.eval = make_pce_eval(data, s.param_dim, s.design_dim, s.data_dim);
    return s;
  }
  throw std::invalid_argument("unknown surrogate kind: " + kind);
}

}  // namespace oed
