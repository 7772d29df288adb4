#include "nodeembed/architectures.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace nodeembed {

using nlohmann::json;

Vec LinearLayer::apply(std::span<const double> h) const {
  if (static_cast<int>(h.size()) != n_in()) throw InputError("linear layer input dimension mismatch");
  const Eigen::Map<const Eigen::VectorXd> v(h.data(), static_cast<Eigen::Index>(h.size()));
  const Eigen::VectorXd out = A * v + a;
  return Vec(out.data(), out.data() + out.size());
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Basic: return "basic";
    case Variant::WithLinear: return "with_linear";
    case Variant::Augmented: return "augmented";
    case Variant::AugmentedWithLinear: return "augmented_with_linear";
    case Variant::TwoLayer: return "two_layer";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& s) {
  for (Variant v : {Variant::Basic, Variant::WithLinear, Variant::Augmented,
                    Variant::AugmentedWithLinear, Variant::TwoLayer}) {
    if (to_string(v) == s) return v;
  }
  throw InputError("unknown architecture variant '" + s + "'");
}

namespace {

Domain or_unbounded(Domain d, int n) { return d.dim() == 0 ? Domain::unbounded(n) : d; }

double max_abs(std::span<const double> v) {
  double r = 0;
  for (double x : v) r = std::max(r, std::fabs(x));
  return r;
}

}  // namespace

NodeArchitecture NodeArchitecture::basic(VectorField f, double T, Domain input) {
  NodeArchitecture a;
  a.variant_ = Variant::Basic;
  a.n_in_ = f.dim();
  a.input_ = or_unbounded(std::move(input), a.n_in_);
  a.field_ = std::move(f);
  a.T_ = T;
  a.validate();
  return a;
}

NodeArchitecture NodeArchitecture::with_linear(VectorField f, double T, LinearLayer L,
                                               Domain input) {
  NodeArchitecture a;
  a.variant_ = Variant::WithLinear;
  a.n_in_ = f.dim();
  a.input_ = or_unbounded(std::move(input), a.n_in_);
  a.field_ = std::move(f);
  a.T_ = T;
  a.linear_ = std::move(L);
  a.validate();
  return a;
}

NodeArchitecture NodeArchitecture::augmented(VectorField f, double T, int n_in, Domain input) {
  NodeArchitecture a;
  a.variant_ = Variant::Augmented;
  a.n_in_ = n_in;
  a.input_ = or_unbounded(std::move(input), n_in);
  a.field_ = std::move(f);
  a.T_ = T;
  a.validate();
  return a;
}

NodeArchitecture NodeArchitecture::augmented_with_linear(VectorField f, double T, int n_in,
                                                         LinearLayer L, Domain input) {
  NodeArchitecture a;
  a.variant_ = Variant::AugmentedWithLinear;
  a.n_in_ = n_in;
  a.input_ = or_unbounded(std::move(input), n_in);
  a.field_ = std::move(f);
  a.T_ = T;
  a.linear_ = std::move(L);
  a.validate();
  return a;
}

NodeArchitecture NodeArchitecture::two_layer(FuncSpec layer1, VectorField f, FuncSpec layer2,
                                             double T, Domain input) {
  NodeArchitecture a;
  a.variant_ = Variant::TwoLayer;
  a.n_in_ = layer1.n_in();
  a.input_ = or_unbounded(std::move(input), a.n_in_);
  a.field_ = std::move(f);
  a.T_ = T;
  a.layer1_ = std::move(layer1);
  a.layer2_ = std::move(layer2);
  a.validate();
  return a;
}

void NodeArchitecture::validate() const {
  if (!(T_ > 0) || !std::isfinite(T_)) throw InputError("horizon T must be positive and finite");
  if (n_in_ < 1) throw InputError("architecture input dimension must be at least 1");
  if (input_.dim() != n_in_) throw InputError("input domain dimension must equal n_in");
  const int m = field_.dim();
  switch (variant_) {
    case Variant::Basic:
    case Variant::WithLinear:
      if (m != n_in_) throw InputError("field dimension must equal the input dimension");
      break;
    case Variant::Augmented:
    case Variant::AugmentedWithLinear:
      if (m <= n_in_) {
        throw InputError("augmented field dimension " + std::to_string(m) +
                         " must exceed the input dimension " + std::to_string(n_in_));
      }
      break;
    case Variant::TwoLayer:
      if (layer1_->n_out() != m || layer2_->n_in() != m) {
        throw InputError("layer shapes must match the field dimension " + std::to_string(m));
      }
      break;
  }
  if (linear_) {
    const auto& L = *linear_;
    if (L.n_in() != m) throw InputError("linear layer must have " + std::to_string(m) + " columns");
    if (L.a.size() != L.A.rows()) throw InputError("linear layer offset length must equal its rows");
    if (!L.A.allFinite() || !L.a.allFinite()) throw InputError("linear layer has non-finite entries");
    if (L.n_out() < 1) throw InputError("linear layer needs at least one row");
  }
}

int NodeArchitecture::n_out() const noexcept {
  switch (variant_) {
    case Variant::Basic: return field_.dim();
    case Variant::Augmented: return n_in_;
    case Variant::WithLinear:
    case Variant::AugmentedWithLinear: return linear_->n_out();
    case Variant::TwoLayer: return layer2_->n_out();
  }
  return 0;
}

NodeArchitecture NodeArchitecture::with_config(IntegratorConfig cfg) const {
  cfg.validate();
  NodeArchitecture a = *this;
  a.cfg_ = cfg;
  return a;
}

Vec NodeArchitecture::initial_state(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_in_) {
    throw InputError("input has dimension " + std::to_string(x.size()) + ", architecture expects " +
                     std::to_string(n_in_));
  }
  if (!input_.contains(x)) throw DomainError("input point outside the architecture's input domain");
  if (variant_ == Variant::TwoLayer) return layer1_->eval(x);
  Vec h(field_.dim(), 0.0);
  std::copy(x.begin(), x.end(), h.begin());
  return h;
}

Trajectory NodeArchitecture::trajectory(std::span<const double> x) const {
  return integrate(field_, initial_state(x), T_, cfg_);
}

Evaluation NodeArchitecture::evaluate(std::span<const double> x) const {
  Evaluation ev;
  ev.final_state = time_T_map(field_, initial_state(x), T_, cfg_);
  const Vec& h = ev.final_state;
  switch (variant_) {
    case Variant::Basic: ev.output = h; break;
    case Variant::Augmented:
      ev.output.assign(h.begin(), h.begin() + n_in_);
      ev.defect = max_abs(std::span<const double>(h).subspan(n_in_));
      break;
    case Variant::WithLinear:
    case Variant::AugmentedWithLinear: ev.output = linear_->apply(h); break;
    case Variant::TwoLayer: ev.output = layer2_->eval(h); break;
  }
  return ev;
}

json NodeArchitecture::to_json() const {
  json j;
  j["variant"] = to_string(variant_);
  j["field"] = field_.spec().to_json();
  j["T"] = T_;
  j["m"] = field_.dim();
  j["n_in"] = n_in_;
  if (linear_) {
    json A = json::array();
    for (Eigen::Index r = 0; r < linear_->A.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < linear_->A.cols(); ++c) row.push_back(linear_->A(r, c));
      A.push_back(row);
    }
    j["linear"] = {{"A", A}, {"a", Vec(linear_->a.data(), linear_->a.data() + linear_->a.size())}};
  }
  if (layer1_) j["layer1"] = layer1_->to_json();
  if (layer2_) j["layer2"] = layer2_->to_json();
  j["input_domain"] = domain_to_json(input_);
  return j;
}

namespace {

LinearLayer linear_from_json(const json& j) {
  if (!j.is_object() || !j.contains("A")) throw InputError("linear layer needs an \"A\" matrix");
  const auto& A = j.at("A");
  if (!A.is_array() || A.empty()) throw InputError("linear layer \"A\" must be a non-empty array");
  LinearLayer L;
  const auto rows = static_cast<Eigen::Index>(A.size());
  const auto cols = static_cast<Eigen::Index>(A[0].size());
  L.A.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!A[r].is_array() || static_cast<Eigen::Index>(A[r].size()) != cols) {
      throw InputError("linear layer \"A\" rows must have equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) L.A(r, c) = A[r][c].get<double>();
  }
  L.a = Eigen::VectorXd::Zero(rows);
  if (j.contains("a")) {
    const Vec a = j.at("a").get<Vec>();
    if (static_cast<Eigen::Index>(a.size()) != rows) throw InputError("linear offset length must equal rows of A");
    for (Eigen::Index r = 0; r < rows; ++r) L.a(r) = a[r];
  }
  return L;
}

}  // namespace

NodeArchitecture NodeArchitecture::from_json(const json& j) {
  try {
    if (!j.is_object()) throw InputError("architecture JSON must be an object");
    const Variant v = variant_from_string(j.at("variant").get<std::string>());
    VectorField f(FuncSpec::from_json(j.at("field")));
    const double T = j.at("T").get<double>();
    if (j.contains("m") && j.at("m").get<int>() != f.dim()) {
      throw InputError("\"m\" does not match the field dimension");
    }
    auto input_for = [&](int n) {
      return j.contains("input_domain") ? domain_from_json(j.at("input_domain"), n)
                                        : Domain::unbounded(n);
    };
    switch (v) {
      case Variant::Basic: return basic(f, T, input_for(f.dim()));
      case Variant::WithLinear:
        return with_linear(f, T, linear_from_json(j.at("linear")), input_for(f.dim()));
      case Variant::Augmented:
      case Variant::AugmentedWithLinear: {
        if (!j.contains("n_in")) throw InputError("augmented architecture needs \"n_in\"");
        const int n = j.at("n_in").get<int>();
        if (n < 1) throw InputError("\"n_in\" must be at least 1");
        if (v == Variant::Augmented) return augmented(f, T, n, input_for(n));
        return augmented_with_linear(f, T, n, linear_from_json(j.at("linear")), input_for(n));
      }
      case Variant::TwoLayer: {
        FuncSpec l1 = FuncSpec::from_json(j.at("layer1"));
        FuncSpec l2 = FuncSpec::from_json(j.at("layer2"));
        const int n = l1.n_in();
        return two_layer(std::move(l1), f, std::move(l2), T, input_for(n));
      }
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed architecture JSON: ") + e.what());
  }
  throw InputError("unreachable architecture variant");
}

std::string VerificationReport::table_csv() const {
  std::ostringstream os;
  const std::size_t n = table.empty() ? 0 : table.front().x.size();
  std::size_t k = 0;
  for (const auto& row : table) k = std::max(k, std::max(row.node.size(), row.target.size()));
  for (std::size_t i = 1; i <= n; ++i) os << 'x' << i << ',';
  for (std::size_t i = 1; i <= k; ++i) os << "node" << i << ',';
  for (std::size_t i = 1; i <= k; ++i) os << "target" << i << ',';
  os << "err,defect,status\n";
  for (const auto& row : table) {
    for (double v : row.x) os << format_csv_number(v) << ',';
    for (std::size_t i = 0; i < k; ++i) os << (i < row.node.size() ? format_csv_number(row.node[i]) : "") << ',';
    for (std::size_t i = 0; i < k; ++i) os << (i < row.target.size() ? format_csv_number(row.target[i]) : "") << ',';
    if (row.failure.empty()) {
      os << format_csv_number(row.err) << ',' << format_csv_number(row.defect) << ",ok\n";
    } else {
      std::string msg = row.failure;
      for (char& c : msg) {
        if (c == ',' || c == '\n' || c == '"') c = ' ';
      }
      os << ",," << msg << '\n';
    }
  }
  return os.str();
}

json VerificationReport::to_json(const std::string& table_ref) const {
  json j;
  j["max_err"] = max_err;
  j["argmax"] = argmax;
  j["pass"] = pass;
  j["tol"] = tol;
  j["defect"] = defect ? json(*defect) : json(nullptr);
  j["table_csv"] = table_ref;
  j["n_points"] = table.size();
  j["failures"] = failures;
  return j;
}

VerificationReport verify_embedding(const NodeArchitecture& arch, const FuncSpec& target,
                                    const Grid& grid, double tol) {
  if (!(tol > 0)) throw InputError("verification tolerance must be positive");
  if (target.n_in() != arch.n_in() || target.n_out() != arch.n_out()) {
    throw InputError("target maps R^" + std::to_string(target.n_in()) + " -> R^" +
                     std::to_string(target.n_out()) + " but the architecture maps R^" +
                     std::to_string(arch.n_in()) + " -> R^" + std::to_string(arch.n_out()));
  }
  if (grid.dim() != arch.n_in()) throw InputError("grid dimension must equal the input dimension");
  VerificationReport rep;
  rep.tol = tol;
  const bool augmented = arch.variant() == Variant::Augmented;
  if (augmented) rep.defect = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    PointResult row;
    row.x = grid.point(i);
    try {
      const Evaluation ev = arch.evaluate(row.x);
      row.node = ev.output;
      row.defect = ev.defect;
      row.target = target.eval(row.x);
      double e = 0;
      for (std::size_t k = 0; k < row.node.size(); ++k) {
        e = std::max(e, std::fabs(row.node[k] - row.target[k]));
      }
      if (!std::isfinite(e)) throw NumericalError("non-finite error");
      row.err = e;
      if (!any || e > rep.max_err) {
        rep.max_err = e;
        rep.argmax = row.x;
        any = true;
      }
      if (augmented) rep.defect = std::max(*rep.defect, ev.defect);
    } catch (const Error& e) {
      row.failure = e.what();
      row.err = std::numeric_limits<double>::quiet_NaN();
      ++rep.failures;
    }
    rep.table.push_back(std::move(row));
  }
  if (!any) rep.max_err = std::numeric_limits<double>::quiet_NaN();
  rep.pass = any && rep.failures == 0 && rep.max_err <= tol;
  return rep;
}

NodeArchitecture augment_time(const VectorField& f, double T, Domain input) {
  const int m = f.dim();
  std::vector<Expr> comps = f.spec().components();  // x_m already denotes time
  comps.push_back(Expr(1.0));
  std::vector<Interval> dims = f.spec().domain().intervals();
  if (!f.time_dependent()) dims.push_back(Interval{});
  FuncSpec spec(f.spec().name() + "_autonomous", m + 1, std::move(comps), Domain(std::move(dims)));
  LinearLayer L;
  L.A = Eigen::MatrixXd::Zero(m, m + 1);
  L.A.leftCols(m).setIdentity();
  L.a = Eigen::VectorXd::Zero(m);
  return NodeArchitecture::augmented_with_linear(VectorField(std::move(spec)), T, m, std::move(L),
                                                 std::move(input));
}

}  // namespace nodeembed
