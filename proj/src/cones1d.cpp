#include "nmembrane/cones1d.hpp"

#include "nmembrane/error.hpp"

namespace nmembrane {

bool Cone1D::connected() const {
  for (Contact c : pattern)
    if (c == Contact::PointOnly) return false;
  return true;
}

std::string Cone1D::id() const {
  if (pattern.empty()) return "-";
  std::string s;
  for (std::size_t m = 0; m < pattern.size(); ++m) {
    if (m) s += '.';
    s += static_cast<char>(pattern[m]);
  }
  return s;
}

Cone1D Cone1D::reflected() const {
  Cone1D out = *this;
  for (Contact& c : out.pattern) {
    if (c == Contact::LeftHalfLine)
      c = Contact::RightHalfLine;
    else if (c == Contact::RightHalfLine)
      c = Contact::LeftHalfLine;
  }
  return out;
}

std::vector<Contact> parse_pattern(const std::string& id, std::size_t n) {
  std::vector<Contact> pattern;
  if (n <= 1) {
    if (!id.empty() && id != "-") throw Error(ErrorKind::InvalidArgument, "N=1 cone id must be '-'");
    return pattern;
  }
  for (char ch : id) {
    if (ch == '.') continue;
    switch (ch) {
      case 'L': pattern.push_back(Contact::LeftHalfLine); break;
      case 'R': pattern.push_back(Contact::RightHalfLine); break;
      case '0': pattern.push_back(Contact::PointOnly); break;
      default: throw Error(ErrorKind::InvalidArgument, "bad cone id character in '" + id + "'");
    }
  }
  if (pattern.size() != n - 1)
    throw Error(ErrorKind::InvalidArgument, "cone id '" + id + "' has wrong length for N=" + std::to_string(n));
  return pattern;
}

Cone1D make_cone(const ProblemSpec& spec, const std::string& id) {
  return Cone1D{spec, parse_pattern(id, spec.size())};
}

Cone1D least_energy_cone(const ProblemSpec& spec) {
  return Cone1D{spec, std::vector<Contact>(spec.size() ? spec.size() - 1 : 0, Contact::LeftHalfLine)};
}

std::vector<Cone1D> enumerate_cones(const ProblemSpec& spec) {
  const std::size_t m = spec.size() ? spec.size() - 1 : 0;
  static constexpr Contact kOrder[3] = {Contact::LeftHalfLine, Contact::PointOnly, Contact::RightHalfLine};
  std::size_t total = 1;
  for (std::size_t i = 0; i < m; ++i) total *= 3;
  std::vector<Cone1D> cones;
  cones.reserve(total);
  std::vector<Contact> pattern(m);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t i = m; i-- > 0;) {
      pattern[i] = kOrder[c % 3];
      c /= 3;
    }
    cones.push_back(Cone1D{spec, pattern});
  }
  return cones;
}

std::vector<GroupIndex> side_groups(const Cone1D& cone, bool right) {
  const Contact joined = right ? Contact::RightHalfLine : Contact::LeftHalfLine;
  std::vector<GroupIndex> groups;
  std::size_t lo = 1;
  for (std::size_t k = 1; k <= cone.size(); ++k) {
    const bool ends = (k == cone.size()) || cone.pattern[k - 1] != joined;
    if (ends) {
      groups.push_back({lo, k});
      lo = k + 1;
    }
  }
  return groups;
}

ConeCoefficients cone_coefficients(const Cone1D& cone) {
  ConeCoefficients out;
  out.minus.resize(cone.size());
  out.plus.resize(cone.size());
  for (bool right : {false, true}) {
    auto& coeffs = right ? out.plus : out.minus;
    for (GroupIndex g : side_groups(cone, right)) {
      const double a = 0.5 * group_force(cone.spec, g);
      for (std::size_t i = g.lo; i <= g.hi; ++i) coeffs[i - 1] = a;
    }
  }
  return out;
}

BranchLayout branch_layout(const Cone1D& cone) {
  if (!cone.connected())
    throw Error(ErrorKind::NotConnected, "cone " + cone.id() + " has a point-only coincidence set");
  BranchLayout layout;
  layout.left_groups = side_groups(cone, false);
  layout.right_groups = side_groups(cone, true);
  layout.branch_count = layout.left_groups.size() + layout.right_groups.size();
  return layout;
}

DegenerateDecomposition decompose_degenerate(const Cone1D& cone) {
  DegenerateDecomposition out;
  out.cone = cone;
  std::size_t lo = 1;
  for (std::size_t k = 1; k <= cone.size(); ++k) {
    const bool ends = (k == cone.size()) || cone.pattern[k - 1] == Contact::PointOnly;
    if (!ends) continue;
    if (k < cone.size()) out.cut_indices.push_back(k);
    DegenerateGroup group;
    group.index = {lo, k};
    const double fg = group_force(cone.spec, group.index);
    group.quadratic_coefficient = fg;
    ProblemSpec sub;
    for (std::size_t i = lo; i <= k; ++i) {
      sub.weights.push_back(cone.spec.weights[i - 1]);
      sub.forces.push_back(cone.spec.forces[i - 1] - fg);
    }
    group.sub_cone.spec = sub;
    group.sub_cone.pattern.assign(cone.pattern.begin() + static_cast<std::ptrdiff_t>(lo - 1),
                                  cone.pattern.begin() + static_cast<std::ptrdiff_t>(k - 1));
    out.groups.push_back(std::move(group));
    lo = k + 1;
  }
  return out;
}

std::vector<double> cone_eval(const Cone1D& cone, double x) {
  const ConeCoefficients c = cone_coefficients(cone);
  std::vector<double> out(cone.size());
  for (std::size_t i = 0; i < cone.size(); ++i)
    out[i] = x >= 0.0 ? c.plus[i] * x * x : c.minus[i] * x * x;
  return out;
}

std::vector<double> reassemble(const DegenerateDecomposition& decomposition, double x) {
  std::vector<double> out;
  for (const DegenerateGroup& g : decomposition.groups) {
    const double q = 0.5 * g.quadratic_coefficient * x * x;
    for (double v : cone_eval(g.sub_cone, x)) out.push_back(v + q);
  }
  return out;
}

nlohmann::json cone_to_json(const Cone1D& cone) {
  const ConeCoefficients c = cone_coefficients(cone);
  std::string pattern;
  for (Contact ch : cone.pattern) pattern += static_cast<char>(ch);
  return nlohmann::json{{"id", cone.id()},
                        {"pattern", pattern},
                        {"connected", cone.connected()},
                        {"coefficients", {{"minus", c.minus}, {"plus", c.plus}}}};
}

}  // namespace nmembrane
