#include "basinctl/models.hpp"

#include "basinctl/errors.hpp"

#include <algorithm>
#include <cmath>

namespace basinctl {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  double b = x;
  for (int e = n; e > 0; e >>= 1) {
    if (e & 1) r *= b;
    b *= b;
  }
  return r;
}

double sech2(double x) {
  const double c = std::cosh(x);
  if (std::isinf(c)) return 0.0;
  const double s = 1.0 / c;
  return s * s;
}

}  // namespace

// ---------------------------------------------------------------------------
// 1D feedback family
// ---------------------------------------------------------------------------

ParamModel make_model_1d(double x_ref) {
  ParamModel m;
  m.name = "model1d";
  m.state_dim = 1;
  m.param_dim = 1;
  m.state_names = {"x"};
  m.param_names = {"alpha"};
  m.field_eval = [x_ref](const Vec& x, const Vec& pi) {
    Vec f(1);
    f[0] = x[0] - x[0] * x[0] * x[0] - pi[0] * (x[0] - x_ref);
    return f;
  };
  m.jac_x = [](const Vec& x, const Vec& pi) {
    Mat J(1, 1);
    J(0, 0) = 1.0 - 3.0 * x[0] * x[0] - pi[0];
    return J;
  };
  m.jac_pi = [x_ref](const Vec& x, const Vec&) {
    Mat J(1, 1);
    J(0, 0) = -(x[0] - x_ref);
    return J;
  };
  return m;
}

// ---------------------------------------------------------------------------
// 2D gradient system
// ---------------------------------------------------------------------------

ParamModel make_model_2d(int nx, int ny) {
  ParamModel m;
  m.name = "model2d";
  m.state_dim = 2;
  m.param_dim = 4;
  m.state_names = {"x", "y"};
  m.param_names = {"alpha_x", "alpha_y", "u_x", "u_y"};
  m.field_eval = [nx, ny](const Vec& v, const Vec& pi) {
    const double x = v[0], y = v[1];
    Vec f(2);
    f[0] = -ipow(x, nx) + pi[0] * std::tanh(x) - y + pi[2];
    f[1] = -ipow(y, ny) + pi[1] * std::tanh(y) - x + pi[3];
    return f;
  };
  m.jac_x = [nx, ny](const Vec& v, const Vec& pi) {
    const double x = v[0], y = v[1];
    Mat J(2, 2);
    J(0, 0) = -nx * ipow(x, nx - 1) + pi[0] * sech2(x);
    J(0, 1) = -1.0;
    J(1, 0) = -1.0;
    J(1, 1) = -ny * ipow(y, ny - 1) + pi[1] * sech2(y);
    return J;
  };
  m.jac_pi = [](const Vec& v, const Vec&) {
    Mat J = Mat::Zero(2, 4);
    J(0, 0) = std::tanh(v[0]);
    J(1, 1) = std::tanh(v[1]);
    J(0, 2) = 1.0;
    J(1, 3) = 1.0;
    return J;
  };
  return m;
}

Vec model_2d_default_parameters() {
  Vec pi(4);
  pi << 3.0, 4.0, 0.3, 1.0;
  return pi;
}

double potential_2d(double x, double y, const Vec& pi, int nx, int ny) {
  return ipow(x, nx + 1) / (nx + 1) + ipow(y, ny + 1) / (ny + 1) -
         pi[0] * std::log(std::abs(std::cosh(x))) - pi[1] * std::log(std::abs(std::cosh(y))) +
         x * y - pi[2] * x - pi[3] * y;
}

// ---------------------------------------------------------------------------
// EMT network
// ---------------------------------------------------------------------------

namespace {

// x^p for the exponents Hill functions need; integer p takes the fast exact
// path (also defines negative bases, which transient Newton iterates hit).
double powp(double x, double p) {
  const int ip = static_cast<int>(p);
  if (p == static_cast<double>(ip) && ip >= 0 && ip <= 32) return ipow(x, ip);
  return std::pow(x, p);
}

// Hill activation x^p/(x^p + k^p) and helpers. Half-activations must stay
// positive; everything else may roam during control.
struct Hill {
  double p;
  double val(double x, double k) const {
    const double xp = powp(x, p), kp = powp(k, p);
    return xp / (xp + kp);
  }
  double bar(double x, double k) const {
    const double xp = powp(x, p), kp = powp(k, p);
    return kp / (xp + kp);
  }
  double dx(double x, double k) const {
    const double xp = powp(x, p), kp = powp(k, p);
    const double den = (xp + kp) * (xp + kp);
    return p * powp(x, p - 1.0) * kp / den;
  }
  double dk(double x, double k) const {
    const double xp = powp(x, p), kp = powp(k, p);
    const double den = (xp + kp) * (xp + kp);
    return -p * powp(k, p - 1.0) * xp / den;
  }
  // d/dp of val; equals H * (1-H) * log(|x|/k), 0 at x = 0.
  double dp(double x, double k) const {
    if (x == 0.0) return 0.0;
    const double h = val(x, k);
    return h * (1.0 - h) * std::log(std::abs(x) / k);
  }
};

void check_emt_domain(const EmtParams& q) {
  for (double kv : q.k)
    if (!(kv > 0.0))
      throw ParamDomainError("emt: Hill half-activation k must be positive, got " +
                             std::to_string(kv));
  if (!(q.p >= 1.0)) throw ParamDomainError("emt: Hill exponent p must be >= 1");
}

}  // namespace

Vec EmtParams::to_vector(bool include_p) const {
  Vec pi(include_p ? 32 : 31);
  for (int i = 0; i < 11; ++i) pi[i] = alpha[i];
  for (int i = 0; i < 16; ++i) pi[11 + i] = k[i];
  pi[27] = beta_S;
  pi[28] = beta_E;
  pi[29] = beta_N;
  pi[30] = beta_P;
  if (include_p) pi[31] = p;
  return pi;
}

EmtParams EmtParams::from_vector(const Vec& pi, double p_fixed, bool include_p) {
  EmtParams q;
  for (int i = 0; i < 11; ++i) q.alpha[i] = pi[i];
  for (int i = 0; i < 16; ++i) q.k[i] = pi[11 + i];
  q.beta_S = pi[27];
  q.beta_E = pi[28];
  q.beta_N = pi[29];
  q.beta_P = pi[30];
  q.p = include_p ? pi[31] : p_fixed;
  return q;
}

Vec EmtParams::trapping_bounds() const {
  Vec b(4);
  b[0] = alpha[0] + alpha[1] + beta_S;
  b[1] = alpha[2] + alpha[3] + beta_E;
  b[2] = alpha[4] + alpha[5] + alpha[6] + alpha[7] + beta_N;
  b[3] = alpha[8] * (alpha[9] + alpha[10]) + beta_P;
  return b;
}

Vec EmtParams::phenotype_thresholds() const {
  Vec t(4);
  t[0] = (k[1] + k[4] + k[6] + k[8] + k[12]) / 5.0;  // S feeds k2,k5,k7,k9,k13
  t[1] = (k[0] + k[2] + k[5] + k[9] + k[13]) / 5.0;  // E feeds k1,k3,k6,k10,k14
  t[2] = (k[3] + k[7] + k[10] + k[14]) / 4.0;        // N feeds k4,k8,k11,k15
  t[3] = (k[11] + k[15]) / 2.0;                      // P feeds k12,k16
  return t;
}

std::string emt_phenotype_label(const Vec& x, const EmtParams& params) {
  const Vec t = params.phenotype_thresholds();
  const bool S = x[0] > t[0], E = x[1] > t[1], N = x[2] > t[2], P = x[3] > t[3];
  if (!S && E && N && !P) return "epithelial";
  if (!S && E && N && P) return "senescent";
  if (S && !E && N && !P) return "mesenchymal";
  return "other";
}

ParamModel make_model_emt(const EmtParams& base, bool include_p) {
  ParamModel m;
  m.name = "emt";
  m.state_dim = 4;
  m.param_dim = include_p ? 32 : 31;
  m.state_names = {"S", "E", "N", "P"};
  for (int i = 1; i <= 11; ++i) m.param_names.push_back("alpha" + std::to_string(i));
  for (int i = 1; i <= 16; ++i) m.param_names.push_back("k" + std::to_string(i));
  m.param_names.insert(m.param_names.end(), {"beta_S", "beta_E", "beta_N", "beta_P"});
  if (include_p) m.param_names.push_back("p");
  const double p_fixed = base.p;

  auto unpack = [p_fixed, include_p](const Vec& pi) {
    EmtParams q = EmtParams::from_vector(pi, p_fixed, include_p);
    check_emt_domain(q);
    return q;
  };

  m.field_eval = [unpack](const Vec& x, const Vec& pi) {
    const EmtParams q = unpack(pi);
    const Hill H{q.p};
    const double S = x[0], E = x[1], N = x[2], P = x[3];
    const auto& a = q.alpha;
    const auto& k = q.k;
    Vec f(4);
    f[0] = a[0] * H.bar(E, k[0]) + a[1] * H.val(S, k[1]) * H.val(E, k[2]) * H.val(N, k[3]) +
           q.beta_S - S;
    f[1] = a[2] * H.bar(S, k[4]) + a[3] * H.val(E, k[5]) * H.val(S, k[6]) * H.bar(N, k[7]) +
           q.beta_E - E;
    f[2] = a[4] * H.val(S, k[8]) + a[5] * H.val(E, k[9]) + a[6] * H.val(N, k[10]) +
           a[7] * H.val(P, k[11]) + q.beta_N - N;
    f[3] = a[8] * H.bar(S, k[12]) *
               (a[9] * H.val(E, k[13]) * H.val(N, k[14]) + a[10] * H.val(P, k[15])) +
           q.beta_P - P;
    return f;
  };

  m.jac_x = [unpack](const Vec& x, const Vec& pi) {
    const EmtParams q = unpack(pi);
    const Hill H{q.p};
    const double S = x[0], E = x[1], N = x[2], P = x[3];
    const auto& a = q.alpha;
    const auto& k = q.k;
    Mat J = Mat::Zero(4, 4);
    J(0, 0) = a[1] * H.dx(S, k[1]) * H.val(E, k[2]) * H.val(N, k[3]) - 1.0;
    J(0, 1) = -a[0] * H.dx(E, k[0]) + a[1] * H.val(S, k[1]) * H.dx(E, k[2]) * H.val(N, k[3]);
    J(0, 2) = a[1] * H.val(S, k[1]) * H.val(E, k[2]) * H.dx(N, k[3]);
    J(1, 0) = -a[2] * H.dx(S, k[4]) + a[3] * H.val(E, k[5]) * H.dx(S, k[6]) * H.bar(N, k[7]);
    J(1, 1) = a[3] * H.dx(E, k[5]) * H.val(S, k[6]) * H.bar(N, k[7]) - 1.0;
    J(1, 2) = -a[3] * H.val(E, k[5]) * H.val(S, k[6]) * H.dx(N, k[7]);
    J(2, 0) = a[4] * H.dx(S, k[8]);
    J(2, 1) = a[5] * H.dx(E, k[9]);
    J(2, 2) = a[6] * H.dx(N, k[10]) - 1.0;
    J(2, 3) = a[7] * H.dx(P, k[11]);
    const double inner = a[9] * H.val(E, k[13]) * H.val(N, k[14]) + a[10] * H.val(P, k[15]);
    J(3, 0) = -a[8] * H.dx(S, k[12]) * inner;
    J(3, 1) = a[8] * H.bar(S, k[12]) * a[9] * H.dx(E, k[13]) * H.val(N, k[14]);
    J(3, 2) = a[8] * H.bar(S, k[12]) * a[9] * H.val(E, k[13]) * H.dx(N, k[14]);
    J(3, 3) = a[8] * H.bar(S, k[12]) * a[10] * H.dx(P, k[15]) - 1.0;
    return J;
  };

  m.jac_pi = [unpack, include_p](const Vec& x, const Vec& pi) {
    const EmtParams q = unpack(pi);
    const Hill H{q.p};
    const double S = x[0], E = x[1], N = x[2], P = x[3];
    const auto& a = q.alpha;
    const auto& k = q.k;
    Mat J = Mat::Zero(4, include_p ? 32 : 31);
    // interaction strengths
    J(0, 0) = H.bar(E, k[0]);
    J(0, 1) = H.val(S, k[1]) * H.val(E, k[2]) * H.val(N, k[3]);
    J(1, 2) = H.bar(S, k[4]);
    J(1, 3) = H.val(E, k[5]) * H.val(S, k[6]) * H.bar(N, k[7]);
    J(2, 4) = H.val(S, k[8]);
    J(2, 5) = H.val(E, k[9]);
    J(2, 6) = H.val(N, k[10]);
    J(2, 7) = H.val(P, k[11]);
    J(3, 8) = H.bar(S, k[12]) * (a[9] * H.val(E, k[13]) * H.val(N, k[14]) + a[10] * H.val(P, k[15]));
    J(3, 9) = a[8] * H.bar(S, k[12]) * H.val(E, k[13]) * H.val(N, k[14]);
    J(3, 10) = a[8] * H.bar(S, k[12]) * H.val(P, k[15]);
    // half-activations (d bar/dk = -d val/dk)
    J(0, 11) = -a[0] * H.dk(E, k[0]);
    J(0, 12) = a[1] * H.dk(S, k[1]) * H.val(E, k[2]) * H.val(N, k[3]);
    J(0, 13) = a[1] * H.val(S, k[1]) * H.dk(E, k[2]) * H.val(N, k[3]);
    J(0, 14) = a[1] * H.val(S, k[1]) * H.val(E, k[2]) * H.dk(N, k[3]);
    J(1, 15) = -a[2] * H.dk(S, k[4]);
    J(1, 16) = a[3] * H.dk(E, k[5]) * H.val(S, k[6]) * H.bar(N, k[7]);
    J(1, 17) = a[3] * H.val(E, k[5]) * H.dk(S, k[6]) * H.bar(N, k[7]);
    J(1, 18) = -a[3] * H.val(E, k[5]) * H.val(S, k[6]) * H.dk(N, k[7]);
    J(2, 19) = a[4] * H.dk(S, k[8]);
    J(2, 20) = a[5] * H.dk(E, k[9]);
    J(2, 21) = a[6] * H.dk(N, k[10]);
    J(2, 22) = a[7] * H.dk(P, k[11]);
    const double inner = a[9] * H.val(E, k[13]) * H.val(N, k[14]) + a[10] * H.val(P, k[15]);
    J(3, 23) = -a[8] * H.dk(S, k[12]) * inner;
    J(3, 24) = a[8] * H.bar(S, k[12]) * a[9] * H.dk(E, k[13]) * H.val(N, k[14]);
    J(3, 25) = a[8] * H.bar(S, k[12]) * a[9] * H.val(E, k[13]) * H.dk(N, k[14]);
    J(3, 26) = a[8] * H.bar(S, k[12]) * a[10] * H.dk(P, k[15]);
    // source terms
    J(0, 27) = 1.0;
    J(1, 28) = 1.0;
    J(2, 29) = 1.0;
    J(3, 30) = 1.0;
    if (include_p) {
      // d bar/dp = -d val/dp
      J(0, 31) = -a[0] * H.dp(E, k[0]) +
                 a[1] * (H.dp(S, k[1]) * H.val(E, k[2]) * H.val(N, k[3]) +
                         H.val(S, k[1]) * H.dp(E, k[2]) * H.val(N, k[3]) +
                         H.val(S, k[1]) * H.val(E, k[2]) * H.dp(N, k[3]));
      J(1, 31) = -a[2] * H.dp(S, k[4]) +
                 a[3] * (H.dp(E, k[5]) * H.val(S, k[6]) * H.bar(N, k[7]) +
                         H.val(E, k[5]) * H.dp(S, k[6]) * H.bar(N, k[7]) -
                         H.val(E, k[5]) * H.val(S, k[6]) * H.dp(N, k[7]));
      J(2, 31) = a[4] * H.dp(S, k[8]) + a[5] * H.dp(E, k[9]) + a[6] * H.dp(N, k[10]) +
                 a[7] * H.dp(P, k[11]);
      J(3, 31) = -a[8] * H.dp(S, k[12]) * inner +
                 a[8] * H.bar(S, k[12]) *
                     (a[9] * (H.dp(E, k[13]) * H.val(N, k[14]) + H.val(E, k[13]) * H.dp(N, k[14])) +
                      a[10] * H.dp(P, k[15]));
    }
    return J;
  };
  return m;
}

// ---------------------------------------------------------------------------
// Boolean reduction
// ---------------------------------------------------------------------------

BoolState boolean_pack(bool S, bool E, bool N, bool P) {
  return static_cast<BoolState>((S ? 1 : 0) | (E ? 2 : 0) | (N ? 4 : 0) | (P ? 8 : 0));
}

std::array<bool, 4> boolean_unpack(BoolState s) {
  return {(s & 1) != 0, (s & 2) != 0, (s & 4) != 0, (s & 8) != 0};
}

std::string boolean_to_string(BoolState s) {
  const auto [S, E, N, P] = boolean_unpack(s);
  std::string out = "(";
  out += S ? '1' : '0';
  out += ',';
  out += E ? '1' : '0';
  out += ',';
  out += N ? '1' : '0';
  out += ',';
  out += P ? '1' : '0';
  out += ')';
  return out;
}

BoolState boolean_step(BoolState s) {
  const auto [S, E, N, P] = boolean_unpack(s);
  const bool S1 = !E || (S && E && N);
  const bool E1 = !S || (S && E && !N);
  const bool N1 = S || E || N || P;
  const bool P1 = !S && ((E && N) || P);
  return boolean_pack(S1, E1, N1, P1);
}

std::vector<BooleanAttractor> boolean_attractors() {
  std::vector<BooleanAttractor> attractors;
  std::vector<int> attractor_of(16, -1);

  for (BoolState start = 0; start < 16; ++start) {
    // Walk until a state repeats; 16 states bound the transient.
    std::vector<BoolState> path{start};
    BoolState s = start;
    int cycle_begin = -1;
    while (cycle_begin < 0) {
      s = boolean_step(s);
      for (std::size_t i = 0; i < path.size(); ++i) {
        if (path[i] == s) {
          cycle_begin = static_cast<int>(i);
          break;
        }
      }
      if (cycle_begin < 0) path.push_back(s);
    }
    std::vector<BoolState> cycle(path.begin() + cycle_begin, path.end());
    std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());

    int id = -1;
    for (std::size_t i = 0; i < attractors.size(); ++i) {
      if (attractors[i].cycle == cycle) id = static_cast<int>(i);
    }
    if (id < 0) {
      attractors.push_back({cycle, 0});
      id = static_cast<int>(attractors.size()) - 1;
    }
    attractor_of[start] = id;
  }
  for (int a : attractor_of) attractors[a].basin_size += 1;
  std::sort(attractors.begin(), attractors.end(),
            [](const BooleanAttractor& a, const BooleanAttractor& b) {
              return a.cycle.front() < b.cycle.front();
            });
  return attractors;
}

std::vector<BooleanReferenceCheck> boolean_reference_checks() {
  const std::pair<std::string, BoolState> refs[] = {
      {"epithelial", kBooleanEpithelial},
      {"senescent", kBooleanSenescent},
      {"mesenchymal", kBooleanMesenchymal},
  };
  std::vector<BooleanReferenceCheck> out;
  for (const auto& [name, state] : refs) {
    const BoolState image = boolean_step(state);
    out.push_back({name, state, image, image == state});
  }
  return out;
}

// Calibrated defaults, generated by tools/emt_calibrate (draw stream seed
// 2022, common half-activation grid, draw 809890 at k = 1.0) and frozen
// here; configs/emt_default_params.json carries the same values for the CLI.
// They give a census of 3 stable + 3 saddle + 1 unstable with epithelial,
// senescent, and mesenchymal signatures, all three basins visible in
// [0,4]^4.
EmtParams emt_default_params() {
  EmtParams q;
  q.alpha = {1.4010364951625456, 0.5834174986874314, 1.5374302729442215, 0.2262023688677317,
             1.9246691515597578, 0.7684088143682417, 1.1875504233532732, 1.8349032153209435,
             1.8639708751600867, 0.10477420877240906, 1.5379066616897923};
  q.k.fill(1.0);
  q.beta_S = 0.09519609525823758;
  q.beta_E = 0.12789459098779998;
  q.beta_N = 1.265146054584584;
  q.beta_P = 0.13031036051346212;
  q.p = 4.0;
  return q;
}

Vec emt_default_parameters(bool include_p) { return emt_default_params().to_vector(include_p); }

}  // namespace basinctl
