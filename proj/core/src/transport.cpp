#include "vnslab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace vnslab::ot {

Histogram Histogram::zeros(std::vector<Axis> axes) {
  Histogram h;
  h.axes = std::move(axes);
  std::size_t total = 1;
  for (const auto& a : h.axes) total *= static_cast<std::size_t>(a.bins);
  h.mass.assign(total, 0.0);
  return h;
}

double Histogram::total() const {
  KahanSum s;
  for (double m : mass) s.add(m);
  return s.value();
}

std::vector<double> Histogram::center(std::size_t flat) const {
  std::vector<double> c(axes.size());
  for (int a = static_cast<int>(axes.size()) - 1; a >= 0; --a) {
    int idx = static_cast<int>(flat % axes[a].bins);
    flat /= axes[a].bins;
    c[a] = axes[a].center(idx);
  }
  return c;
}

double Histogram::distance(std::size_t i, std::size_t j) const {
  double acc = 0.0;
  for (int a = static_cast<int>(axes.size()) - 1; a >= 0; --a) {
    int bi = static_cast<int>(i % axes[a].bins);
    int bj = static_cast<int>(j % axes[a].bins);
    i /= axes[a].bins;
    j /= axes[a].bins;
    double dx = std::abs(axes[a].center(bi) - axes[a].center(bj));
    if (axes[a].periodic) {
      double L = axes[a].hi - axes[a].lo;
      dx = std::min(dx, L - dx);
    }
    acc += dx * dx;
  }
  return std::sqrt(acc);
}

namespace {

constexpr double kMassTol = 1e-12;

void check_pair(const Histogram& a, const Histogram& b, std::size_t bin_cap) {
  if (a.axes != b.axes) throw NumericalError("w1: histograms live on different grids");
  if (a.bins() > bin_cap || b.bins() > bin_cap)
    throw NumericalError("w1: bin count exceeds the exact-solver cap");
  double ta = a.total(), tb = b.total();
  if (std::abs(ta - tb) > kMassTol * std::max(1.0, std::max(ta, tb)))
    throw NumericalError("w1: histogram masses differ beyond tolerance");
  for (double m : a.mass)
    if (m < -1e-15) throw NumericalError("w1: negative mass");
  for (double m : b.mass)
    if (m < -1e-15) throw NumericalError("w1: negative mass");
}

/// Transportation-problem network simplex on a dense bipartite instance.
/// Uncapacitated arcs source -> sink with cost(i,j); artificial root start;
/// strongly feasible basis (Cunningham leaving rule) for finite termination.
class TransportSimplex {
 public:
  TransportSimplex(std::vector<double> supply, std::vector<double> demand,
                   std::function<double(int, int)> cost)
      : a_(std::move(supply)), b_(std::move(demand)), cost_(std::move(cost)) {
    S_ = static_cast<int>(a_.size());
    T_ = static_cast<int>(b_.size());
    V_ = S_ + T_ + 1;
    root_ = S_ + T_;
  }

  double solve() {
    if (S_ == 0 || T_ == 0) return 0.0;
    init_tree();
    const long arcs = static_cast<long>(S_) * T_;
    const long block = std::max<long>(64, static_cast<long>(std::sqrt(double(arcs))));
    long cursor = 0;
    const double tol = 1e-13 * (1.0 + max_cost_);
    long stall_limit = 64L * arcs + 4096;  // safety net only
    bool optimal = false;
    for (long iter = 0; iter < stall_limit; ++iter) {
      // block pricing: scan up to `arcs` candidates in blocks, take the most
      // negative reduced cost found in the first block containing one
      int best_i = -1, best_j = -1;
      double best_rc = -tol;
      long scanned = 0;
      while (scanned < arcs) {
        long stop = std::min(arcs, cursor + block);
        for (long e = cursor; e < stop; ++e) {
          int i = static_cast<int>(e / T_);
          int j = static_cast<int>(e % T_);
          double rc = cost_(i, j) + pi_[i] - pi_[S_ + j];
          if (rc < best_rc) {
            best_rc = rc;
            best_i = i;
            best_j = j;
          }
        }
        scanned += stop - cursor;
        cursor = (stop == arcs) ? 0 : stop;
        if (best_i >= 0) break;
      }
      if (best_i < 0) {
        optimal = true;
        break;
      }
      pivot(best_i, S_ + best_j);
    }
    if (!optimal) throw NumericalError("w1: network simplex failed to terminate");
    // objective over tree arcs; artificial arcs must carry no flow
    KahanSum obj;
    for (int w = 0; w < V_; ++w) {
      if (w == root_) continue;
      int p = parent_[w];
      if (p == root_) {
        if (flow_[w] > 1e-9 * (1.0 + total_))
          throw NumericalError("w1: infeasible transport (unbalanced masses)");
        continue;
      }
      int src = (w < S_) ? w : p;
      int snk = (w < S_) ? p : w;
      obj.add(flow_[w] * cost_(src, snk - S_));
    }
    return obj.value();
  }

 private:
  void init_tree() {
    parent_.assign(V_, -1);
    flow_.assign(V_, 0.0);
    up_.assign(V_, false);  // true if basis arc is oriented child -> parent
    pi_.assign(V_, 0.0);
    total_ = 0.0;
    max_cost_ = 0.0;
    for (int i = 0; i < S_; ++i)
      for (int j = 0; j < T_; ++j) max_cost_ = std::max(max_cost_, cost_(i, j));
    const double M = 1.0 + (max_cost_ + 1.0) * (S_ + T_ + 1.0);
    big_m_ = M;
    // sources point to root (arc i -> root), sinks from root (root -> j)
    for (int i = 0; i < S_; ++i) {
      parent_[i] = root_;
      up_[i] = true;
      flow_[i] = a_[i];
      pi_[i] = -M;
      total_ += a_[i];
    }
    for (int j = 0; j < T_; ++j) {
      parent_[S_ + j] = root_;
      up_[S_ + j] = false;
      flow_[S_ + j] = b_[j];
      pi_[S_ + j] = M;
    }
    pi_[root_] = 0.0;
    rebuild_children();
  }

  void rebuild_children() {
    if (static_cast<int>(children_.size()) != V_) children_.resize(V_);
    for (auto& c : children_) c.clear();
    for (int w = 0; w < V_; ++w)
      if (w != root_ && parent_[w] >= 0) children_[parent_[w]].push_back(w);
    if (static_cast<int>(depth_.size()) != V_) depth_.assign(V_, 0);
    depth_[root_] = 0;
    // DFS from root for depth and potentials
    stack_.clear();
    stack_.push_back(root_);
    auto& stack = stack_;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int c : children_[u]) {
        depth_[c] = depth_[u] + 1;
        double arc_cost = basis_cost(c);
        // rc = cost + pi(tail) - pi(head) = 0 on basis arcs
        if (up_[c])  // arc c -> u
          pi_[c] = pi_[u] - arc_cost;
        else  // arc u -> c
          pi_[c] = pi_[u] + arc_cost;
        stack.push_back(c);
      }
    }
  }

  double basis_cost(int child) const {
    int p = parent_[child];
    if (child == root_ || p < 0) return 0.0;
    if (p == root_ || child == root_) return big_m_;
    int src = (child < S_) ? child : p;
    int snk = (child < S_) ? p : child;
    return cost_(src, snk - S_);
  }

  /// Enter arc tail -> head (tail is a source, head is a sink).
  void pivot(int tail, int head) {
    // collect paths to the common ancestor
    std::vector<int> up_tail, up_head;  // nodes whose parent-arc lies on the path
    int x = tail, y = head;
    while (depth_[x] > depth_[y]) {
      up_tail.push_back(x);
      x = parent_[x];
    }
    while (depth_[y] > depth_[x]) {
      up_head.push_back(y);
      y = parent_[y];
    }
    while (x != y) {
      up_tail.push_back(x);
      x = parent_[x];
      up_head.push_back(y);
      y = parent_[y];
    }
    // cycle orientation: tail -> head on the entering arc, then head up to
    // apex, then apex down to tail. Flow on a parent-arc of node w:
    //  - on the head-side (traversed w -> parent): increases if arc oriented
    //    child->parent (up_), else decreases;
    //  - on the tail-side (traversed parent -> w): increases if arc oriented
    //    parent->child (!up_), else decreases.
    double theta = std::numeric_limits<double>::infinity();
    for (int w : up_head)
      if (!up_[w]) theta = std::min(theta, flow_[w]);
    for (int w : up_tail)
      if (up_[w]) theta = std::min(theta, flow_[w]);

    // leaving arc: last blocking arc in cycle order starting at the apex in
    // the cycle orientation (apex -> tail side first, then entering arc,
    // then head -> apex side)
    int leave = -1;
    for (auto it = up_tail.rbegin(); it != up_tail.rend(); ++it)
      if (up_[*it] && flow_[*it] <= theta) leave = *it;
    for (int w : up_head)
      if (!up_[w] && flow_[w] <= theta) leave = w;

    if (!std::isfinite(theta)) throw NumericalError("w1: unbounded pivot");

    // apply flow change
    for (int w : up_head) flow_[w] += up_[w] ? theta : -theta;
    for (int w : up_tail) flow_[w] += up_[w] ? -theta : theta;

    if (leave < 0) throw NumericalError("w1: degenerate pivot without leaving arc");

    // re-root the severed subtree at the entering arc
    // the leaving arc is parent_[leave]; the severed side contains either
    // tail or head
    bool tail_side = on_path(tail, leave);
    int attach = tail_side ? tail : head;
    // reverse parent pointers from `attach` up to `leave`
    int cur = attach;
    int prev_parent = tail_side ? head : tail;
    bool prev_up = tail_side;  // orientation of entering arc seen from child
    double prev_flow = theta;
    while (true) {
      int next = parent_[cur];
      bool cur_up = up_[cur];
      double cur_flow = flow_[cur];
      parent_[cur] = prev_parent;
      up_[cur] = prev_up;
      flow_[cur] = prev_flow;
      if (cur == leave) break;
      prev_parent = cur;
      prev_up = !cur_up;
      prev_flow = cur_flow;
      cur = next;
    }
    rebuild_children();
  }

  /// True if `node`'s path to the root passes through arc parent_[stop].
  bool on_path(int node, int stop) const {
    int x = node;
    while (x != root_ && x >= 0) {
      if (x == stop) return true;
      x = parent_[x];
    }
    return false;
  }

  int S_ = 0, T_ = 0, V_ = 0, root_ = 0;
  std::vector<double> a_, b_;
  std::function<double(int, int)> cost_;
  std::vector<int> parent_;
  std::vector<bool> up_;
  std::vector<double> flow_;
  std::vector<double> pi_;
  std::vector<int> depth_;
  std::vector<std::vector<int>> children_;
  std::vector<int> stack_;
  double total_ = 0.0;
  double max_cost_ = 0.0;
  double big_m_ = 0.0;
};

}  // namespace

double w1_exact(const Histogram& a, const Histogram& b) {
  check_pair(a, b, 4096);
  // shared mass at identical bins moves at zero cost
  std::vector<int> src_bins, snk_bins;
  std::vector<double> supply, demand;
  for (std::size_t k = 0; k < a.bins(); ++k) {
    double r = a.mass[k] - b.mass[k];
    if (r > 0.0) {
      src_bins.push_back(static_cast<int>(k));
      supply.push_back(r);
    } else if (r < 0.0) {
      snk_bins.push_back(static_cast<int>(k));
      demand.push_back(-r);
    }
  }
  if (src_bins.empty() || snk_bins.empty()) return 0.0;
  // balance residual rounding exactly
  {
    double sa = 0.0, sb = 0.0;
    for (double v : supply) sa += v;
    for (double v : demand) sb += v;
    double diff = sa - sb;
    if (std::abs(diff) > kMassTol * std::max(1.0, sa))
      throw NumericalError("w1: residual masses differ beyond tolerance");
    if (diff > 0.0)
      demand.back() += diff;
    else
      supply.back() -= diff;
  }
  TransportSimplex ts(std::move(supply), std::move(demand), [&](int i, int j) {
    return a.distance(src_bins[i], snk_bins[j]);
  });
  return ts.solve();
}

EntropicResult w1_entropic(const Histogram& a, const Histogram& b, double eps, int max_iters,
                           double marginal_tol) {
  if (eps <= 0.0) throw NumericalError("w1_entropic requires eps > 0");
  check_pair(a, b, 2048);
  std::vector<int> ia, ib;
  for (std::size_t k = 0; k < a.bins(); ++k)
    if (a.mass[k] > 0.0) ia.push_back(static_cast<int>(k));
  for (std::size_t k = 0; k < b.bins(); ++k)
    if (b.mass[k] > 0.0) ib.push_back(static_cast<int>(k));
  const int S = static_cast<int>(ia.size()), T = static_cast<int>(ib.size());
  if (S == 0 || T == 0) return {};
  std::vector<double> av(S), bv(T), la(S), lb(T);
  double total = 0.0;
  for (int i = 0; i < S; ++i) {
    av[i] = a.mass[ia[i]];
    total += av[i];
  }
  for (int j = 0; j < T; ++j) bv[j] = b.mass[ib[j]];
  for (int i = 0; i < S; ++i) la[i] = std::log(av[i]);
  for (int j = 0; j < T; ++j) lb[j] = std::log(bv[j]);
  std::vector<double> C(static_cast<std::size_t>(S) * T);
  double cmax = 0.0;
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < T; ++j) {
      double c = a.distance(ia[i], ib[j]);
      C[std::size_t(i) * T + j] = c;
      cmax = std::max(cmax, c);
    }

  std::vector<double> f(S, 0.0), g(T, 0.0);
  int used_iters = 0;
  double marg_err = 0.0;
  // epsilon scaling: geometric descent toward the target eps
  std::vector<double> stages;
  double e = std::max(eps, 0.1 * std::max(cmax, 1e-30));
  while (e > eps * 1.5) {
    stages.push_back(e);
    e *= 0.5;
  }
  stages.push_back(eps);

  auto row_update = [&](double ee) {
    for (int i = 0; i < S; ++i) {
      double m = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < T; ++j)
        m = std::max(m, (g[j] - C[std::size_t(i) * T + j]) / ee);
      double s = 0.0;
      for (int j = 0; j < T; ++j)
        s += std::exp((g[j] - C[std::size_t(i) * T + j]) / ee - m);
      f[i] = ee * (la[i] - m - std::log(s));
    }
  };
  auto col_update = [&](double ee) {
    for (int j = 0; j < T; ++j) {
      double m = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < S; ++i)
        m = std::max(m, (f[i] - C[std::size_t(i) * T + j]) / ee);
      double s = 0.0;
      for (int i = 0; i < S; ++i)
        s += std::exp((f[i] - C[std::size_t(i) * T + j]) / ee - m);
      g[j] = ee * (lb[j] - m - std::log(s));
    }
  };
  auto row_marginal_error = [&](double ee) {
    double err = 0.0;
    for (int i = 0; i < S; ++i) {
      double s = 0.0;
      for (int j = 0; j < T; ++j)
        s += std::exp((f[i] + g[j] - C[std::size_t(i) * T + j]) / ee);
      err = std::max(err, std::abs(s - av[i]));
    }
    return err;
  };

  bool converged = false;
  for (double ee : stages) {
    int stage_iters = (ee == eps) ? max_iters : 200;
    for (int it = 0; it < stage_iters; ++it) {
      row_update(ee);
      col_update(ee);
      ++used_iters;
      if (it % 10 == 9 || it == stage_iters - 1) {
        marg_err = row_marginal_error(ee);
        if (marg_err < marginal_tol * std::max(1.0, total)) {
          if (ee == eps) converged = true;
          break;
        }
      }
    }
  }
  if (!converged) {
    marg_err = row_marginal_error(eps);
    if (marg_err >= 1e-6 * std::max(1.0, total))
      throw NumericalError("w1_entropic failed to converge (eps too small)");
  }

  // plan, rounded onto the transport polytope (row/col scaling + rank-one fix)
  std::vector<double> plan(static_cast<std::size_t>(S) * T);
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < T; ++j)
      plan[std::size_t(i) * T + j] =
          std::exp((f[i] + g[j] - C[std::size_t(i) * T + j]) / eps);
  std::vector<double> rs(S, 0.0), cs(T, 0.0);
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < T; ++j) rs[i] += plan[std::size_t(i) * T + j];
  for (int i = 0; i < S; ++i) {
    double sc = (rs[i] > 0.0) ? std::min(1.0, av[i] / rs[i]) : 0.0;
    for (int j = 0; j < T; ++j) plan[std::size_t(i) * T + j] *= sc;
  }
  for (int j = 0; j < T; ++j) {
    cs[j] = 0.0;
    for (int i = 0; i < S; ++i) cs[j] += plan[std::size_t(i) * T + j];
  }
  for (int j = 0; j < T; ++j) {
    double sc = (cs[j] > 0.0) ? std::min(1.0, bv[j] / cs[j]) : 0.0;
    for (int i = 0; i < S; ++i) plan[std::size_t(i) * T + j] *= sc;
  }
  std::vector<double> ea(S, 0.0), eb(T, 0.0);
  double ea_tot = 0.0;
  for (int i = 0; i < S; ++i) {
    double s = 0.0;
    for (int j = 0; j < T; ++j) s += plan[std::size_t(i) * T + j];
    ea[i] = av[i] - s;
    ea_tot += ea[i];
  }
  for (int j = 0; j < T; ++j) {
    double s = 0.0;
    for (int i = 0; i < S; ++i) s += plan[std::size_t(i) * T + j];
    eb[j] = bv[j] - s;
  }
  if (ea_tot > 0.0)
    for (int i = 0; i < S; ++i)
      for (int j = 0; j < T; ++j)
        plan[std::size_t(i) * T + j] += ea[i] * eb[j] / ea_tot;

  KahanSum value;
  for (std::size_t k = 0; k < plan.size(); ++k) value.add(plan[k] * C[k]);
  return {value.value(), used_iters, marg_err};
}

double dual_certificate(const Histogram& a, const Histogram& b,
                        const std::vector<std::vector<double>>& phis) {
  check_pair(a, b, 1 << 22);
  const int na = static_cast<int>(a.axes.size());
  std::vector<std::size_t> stride(na, 1);
  for (int ax = na - 2; ax >= 0; --ax)
    stride[ax] = stride[ax + 1] * a.axes[ax + 1].bins;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& phi : phis) {
    if (phi.size() != a.bins())
      throw NumericalError("dual_certificate: test function has wrong shape");
    // discrete gradient check: forward differences per axis, Euclidean norm
    for (std::size_t k = 0; k < phi.size(); ++k) {
      double g2 = 0.0;
      std::size_t rem = k;
      bool boundary_skip = false;
      for (int ax = 0; ax < na; ++ax) {
        int idx = static_cast<int>((rem / stride[ax]) % a.axes[ax].bins);
        std::size_t knext;
        if (idx + 1 < a.axes[ax].bins) {
          knext = k + stride[ax];
        } else if (a.axes[ax].periodic) {
          knext = k - static_cast<std::size_t>(idx) * stride[ax];
        } else {
          boundary_skip = true;
          continue;
        }
        double dphi = (phi[knext] - phi[k]) / a.axes[ax].width();
        g2 += dphi * dphi;
      }
      (void)boundary_skip;
      if (g2 > (1.0 + 1e-9) * (1.0 + 1e-9))
        throw NumericalError("dual_certificate: test function is not 1-Lipschitz");
    }
    KahanSum s;
    for (std::size_t k = 0; k < phi.size(); ++k) s.add(phi[k] * (a.mass[k] - b.mass[k]));
    best = std::max(best, s.value());
  }
  return best;
}

spectral::GridField renormalized_density(const spectral::GridField& rho, double t,
                                         const Vec& drift) {
  using spectral::Complex;
  spectral::FourierField f = spectral::analyze(rho);
  Vec shift = scale(drift, t, rho.spec.d);
  for (std::size_t m = 0; m < f.modes(); ++m) {
    auto k = f.freq(m);
    double phase = 0.0;
    for (int a = 0; a < rho.spec.d; ++a) phase += k[a] * shift[a];
    Complex rot = std::polar(1.0, kTwoPi * phase);
    f.at(m, 0) *= rot;
  }
  spectral::GridField wide = spectral::synthesize(f);
  spectral::GridField out(rho.spec, 1);
  for (std::size_t p = 0; p < rho.spec.points(); ++p) out.at(p, 0) = wide.at(p, 0);
  return out;
}

JabinCauchyBound::JabinCauchyBound(const std::vector<double>& t,
                                   const std::vector<double>& emod)
    : t_(t) {
  if (t.size() != emod.size() || t.empty())
    throw NumericalError("jabin bound: bad series");
  sq_.resize(t.size());
  for (std::size_t i = 0; i < emod.size(); ++i) {
    if (emod[i] < 0.0) throw NumericalError("jabin bound: negative modulated energy");
    sq_[i] = std::sqrt(emod[i]);
  }
  prefix_.assign(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i)
    prefix_[i] = prefix_[i - 1] + 0.5 * (sq_[i] + sq_[i - 1]) * (t_[i] - t_[i - 1]);
}

double JabinCauchyBound::operator()(double s, double t) const {
  auto at = [&](double q) {
    if (q <= t_.front()) return 0.0;
    if (q >= t_.back()) return prefix_.back();
    auto it = std::upper_bound(t_.begin(), t_.end(), q);
    std::size_t hi = it - t_.begin();
    std::size_t lo = hi - 1;
    double frac = (q - t_[lo]) / (t_[hi] - t_[lo]);
    double sq_q = sq_[lo] + frac * (sq_[hi] - sq_[lo]);
    return prefix_[lo] + 0.5 * (sq_[lo] + sq_q) * (q - t_[lo]);
  };
  return at(t) - at(s);
}

Histogram phase_space_histogram(const std::vector<double>& x, const std::vector<double>& v,
                                const std::vector<double>& w, int d, int x_bins, int v_bins,
                                double v_lo, double v_hi) {
  std::vector<Axis> axes;
  for (int a = 0; a < d; ++a) axes.push_back({x_bins, 0.0, 1.0, true});
  for (int a = 0; a < d; ++a) axes.push_back({v_bins, v_lo, v_hi, false});
  Histogram h = Histogram::zeros(std::move(axes));
  const std::size_t N = w.size();
  for (std::size_t i = 0; i < N; ++i) {
    std::size_t flat = 0;
    for (int a = 0; a < d; ++a) {
      int b = static_cast<int>(wrap01(x[i * d + a]) * x_bins);
      if (b >= x_bins) b = x_bins - 1;
      flat = flat * x_bins + b;
    }
    for (int a = 0; a < d; ++a) {
      double frac = (v[i * d + a] - v_lo) / (v_hi - v_lo);
      int b = static_cast<int>(frac * v_bins);
      b = std::clamp(b, 0, v_bins - 1);
      flat = flat * v_bins + b;
    }
    h.mass[flat] += w[i];
  }
  return h;
}

Histogram density_histogram(const spectral::GridField& rho, int nx) {
  const int n = rho.spec.n, d = rho.spec.d;
  if (n % nx != 0) throw NumericalError("density_histogram: bins must divide the grid");
  std::vector<Axis> axes;
  for (int a = 0; a < d; ++a) axes.push_back({nx, 0.0, 1.0, true});
  Histogram h = Histogram::zeros(std::move(axes));
  const double cellvol = rho.spec.cell_volume();
  for (std::size_t p = 0; p < rho.spec.points(); ++p) {
    std::size_t rem = p, flat = 0;
    std::array<int, 3> idx = {0, 0, 0};
    for (int a = d - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % n);
      rem /= n;
    }
    for (int a = 0; a < d; ++a) flat = flat * nx + idx[a] / (n / nx);
    h.mass[flat] += std::max(0.0, rho.at(p, 0)) * cellvol;
  }
  return h;
}

}  // namespace vnslab::ot
