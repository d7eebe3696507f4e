#include "lorasp/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <json.hpp>

#include "lorasp/error.hpp"

namespace lorasp {

const char* schedule_name(EpsSchedule s) {
  switch (s) {
  case EpsSchedule::constant: return "const";
  case EpsSchedule::leaf_anchored: return "leaf";
  case EpsSchedule::root_anchored: return "root";
  }
  return "?";
}

const char* mode_name(SolverMode m) {
  switch (m) {
  case SolverMode::lorasp: return "lorasp";
  case SolverMode::gc_constant: return "gc-constant";
  case SolverMode::gc_eigenvector: return "gc-eigenvector";
  case SolverMode::gc_user: return "gc-user";
  }
  return "?";
}

EpsSchedule parse_schedule(const std::string& s) {
  if (s == "const" || s == "constant") return EpsSchedule::constant;
  if (s == "leaf") return EpsSchedule::leaf_anchored;
  if (s == "root") return EpsSchedule::root_anchored;
  throw InvalidArgument("unknown eps schedule '" + s + "'");
}

SolverMode parse_mode(const std::string& s) {
  if (s == "lorasp") return SolverMode::lorasp;
  if (s == "gc-constant") return SolverMode::gc_constant;
  if (s == "gc-eigenvector") return SolverMode::gc_eigenvector;
  if (s == "gc-user") return SolverMode::gc_user;
  throw InvalidArgument("unknown solver mode '" + s + "'");
}

void SolverConfig::validate() const {
  if (!(eps >= 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in [0, 1)");
  if (leaf_size < 1) throw InvalidArgument("leaf size must be at least 1");
  if (eps1 < 0.0) throw InvalidArgument("eps1 must be nonnegative");
  if (h < 0.0) throw InvalidArgument("mesh width must be nonnegative");
}

double eps_for_level(const SolverConfig& cfg, int l, int l_max, double h) {
  // 2^(e/3) = 2^q * 2^(r/3) with e = 3q + r, 0 <= r < 3, so every third level
  // differs by an exact power of two.
  auto scaled = [](double base, int e) {
    const int q = e >= 0 ? e / 3 : -((-e + 2) / 3);
    const int r = e - 3 * q;
    const double frac = r == 0 ? 1.0 : std::pow(2.0, r / 3.0);
    return std::ldexp(base * frac, q);
  };
  switch (cfg.eps_schedule) {
  case EpsSchedule::constant: return cfg.eps;
  case EpsSchedule::leaf_anchored: return scaled(cfg.eps, l - l_max);
  case EpsSchedule::root_anchored: return scaled(cfg.eps * h, l_max - l);
  }
  return cfg.eps;
}

LowRankFactor compress_step(const SolverConfig& cfg, const Matrix& a_sw, const Matrix& phi_s, const Matrix& phi_w,
                            double eps_l) {
  LowRankFactor f;
  if (a_sw.cols() == 0 || a_sw.rows() == 0) {
    f.U = Matrix::Zero(a_sw.rows(), 0);
    f.Rt = Matrix::Zero(0, a_sw.cols());
    return f;
  }
  if (!cfg.preserving() || phi_s.cols() == 0) return truncated_svd(a_sw, eps_l, cfg.tolerance);
  if (cfg.preservation == PreservationStyle::exact)
    return preserving_compress(a_sw, phi_s, a_sw * phi_w, eps_l, cfg.tolerance);
  const ProjectionResult p = project(cfg.scheme, a_sw.transpose(), phi_s, phi_w, std::min(cfg.eps1, eps_l), eps_l);
  f.U = p.U;
  f.Rt = p.Rt;
  f.err = p.err;
  f.norm = two_norm(a_sw);
  return f;
}

Matrix NodeFactor::restrict_to_parent(const Matrix& r) const {
  return schur.solve(Matrix(U.transpose() * ass.solve(r)));
}

Matrix NodeFactor::local_solve(const Matrix& r) const {
  const Matrix y = ass.solve(r);
  return y - W * schur.solve(Matrix(U.transpose() * y));
}

Index NodeFactor::entries() const {
  Index e = dim * dim + 2 * dim * rank + rank * rank;
  for (const Coupling& c : couplings) e += c.block.size();
  return e;
}

namespace {

struct Link {
  Index other;
  Matrix block; // A(self, other)
};

struct Node {
  Index dim = 0;
  Matrix diag;
  std::vector<Link> links; // sorted by other
  Matrix phi;
  bool alive = false;
};

Link* find_link(Node& a, Index other) {
  auto it = std::lower_bound(a.links.begin(), a.links.end(), other,
                             [](const Link& l, Index o) { return l.other < o; });
  return it != a.links.end() && it->other == other ? &*it : nullptr;
}

Matrix& link_block(Node& a, Index other, Index cols) {
  auto it = std::lower_bound(a.links.begin(), a.links.end(), other,
                             [](const Link& l, Index o) { return l.other < o; });
  if (it == a.links.end() || it->other != other) it = a.links.insert(it, Link{other, Matrix::Zero(a.dim, cols)});
  return it->block;
}

void erase_link(Node& a, Index other) {
  auto it = std::lower_bound(a.links.begin(), a.links.end(), other,
                             [](const Link& l, Index o) { return l.other < o; });
  if (it != a.links.end() && it->other == other) a.links.erase(it);
}

void symmetrize(Matrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

Matrix assemble_dense(const std::vector<Node>& nodes) {
  std::vector<Index> off(nodes.size() + 1, 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) off[i + 1] = off[i] + (nodes[i].alive ? nodes[i].dim : 0);
  Matrix d = Matrix::Zero(off.back(), off.back());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].alive || nodes[i].dim == 0) continue;
    d.block(off[i], off[i], nodes[i].dim, nodes[i].dim) = nodes[i].diag;
    for (const Link& l : nodes[i].links) d.block(off[i], off[l.other], nodes[i].dim, l.block.cols()) = l.block;
  }
  return d;
}

// Active system of one level: supers 0..N-1, parent reds N..2N-1.
class LevelEliminator {
public:
  LevelEliminator(const ClusterHierarchy& hier, const SolverConfig& cfg, int level, double eps,
                  const FactorObservers* obs, std::vector<Node> reds)
      : hier_(hier), cfg_(cfg), level_(level), eps_(eps), obs_(obs), n_supers_(static_cast<Index>(reds.size()) / 2) {
    act_.resize(2 * n_supers_);
    red_dim_.resize(reds.size());
    for (std::size_t i = 0; i < reds.size(); ++i) red_dim_[i] = reds[i].dim;
    for (Index s = 0; s < n_supers_; ++s) merge(s, reds);
  }

  Index fill_entries() const {
    Index e = 0;
    for (const Node& a : act_)
      for (const Link& l : a.links) e += l.block.size();
    return e;
  }

  LevelFactor run(LevelStats& st) {
    LevelFactor lf;
    lf.level = level_;
    lf.eps = eps_;
    Index off = 0;
    for (Index s = 0; s < n_supers_; ++s) {
      NodeFactor nf = eliminate(s, st);
      nf.offset = off;
      off += nf.dim;
      lf.nodes.push_back(std::move(nf));
    }
    lf.super_size = off;
    std::vector<Index> parent_off(n_supers_ + 1, 0);
    for (Index s = 0; s < n_supers_; ++s) parent_off[s + 1] = parent_off[s] + lf.nodes[s].rank;
    lf.parent_size = parent_off.back();
    for (NodeFactor& nf : lf.nodes) {
      nf.parent_offset = parent_off[nf.id];
      for (Coupling& c : nf.couplings) c.offset = c.to_parent ? parent_off[c.node] : lf.nodes[c.node].offset;
    }
    Index rank_sum = 0;
    for (const NodeFactor& nf : lf.nodes) {
      st.max_rank = std::max(st.max_rank, nf.rank);
      rank_sum += nf.rank;
      st.factor_entries += nf.entries();
    }
    st.nodes = n_supers_;
    st.mean_rank = n_supers_ > 0 ? static_cast<double>(rank_sum) / static_cast<double>(n_supers_) : 0.0;
    return lf;
  }

  // Parent red nodes become the reds of the next level.
  std::vector<Node> parents() {
    std::vector<Node> out(n_supers_);
    for (Index i = 0; i < n_supers_; ++i) {
      out[i] = std::move(act_[n_supers_ + i]);
      for (Link& l : out[i].links) l.other -= n_supers_;
    }
    return out;
  }

private:
  void merge(Index s, std::vector<Node>& reds) {
    Node& a = reds[2 * s];
    Node& b = reds[2 * s + 1];
    Node& m = act_[s];
    m.dim = a.dim + b.dim;
    m.alive = true;
    m.diag = Matrix::Zero(m.dim, m.dim);
    m.diag.topLeftCorner(a.dim, a.dim) = a.diag;
    m.diag.bottomRightCorner(b.dim, b.dim) = b.diag;
    if (Link* l = find_link(a, 2 * s + 1)) {
      m.diag.topRightCorner(a.dim, b.dim) = l->block;
      m.diag.bottomLeftCorner(b.dim, a.dim) = l->block.transpose();
    }
    m.phi.resize(m.dim, a.phi.cols());
    if (a.phi.cols() > 0) m.phi << a.phi, b.phi;
    auto add = [&](const Node& red, Index row0) {
      for (const Link& l : red.links) {
        const Index t = l.other / 2;
        if (t == s) continue;
        const Index col0 = (l.other % 2 == 0) ? 0 : red_dim_[2 * t];
        const Index cols = red_dim_[2 * t] + red_dim_[2 * t + 1];
        link_block(m, t, cols).block(row0, col0, red.dim, l.block.cols()) = l.block;
      }
    };
    add(a, 0);
    add(b, a.dim);
    a = Node();
    b = Node();
  }

  Index owner(Index k) const { return k < n_supers_ ? k : k - n_supers_; }

  NodeFactor eliminate(Index s, LevelStats& st) {
    Node& node = act_[s];
    const std::string ctx = "level " + std::to_string(level_) + " node " + std::to_string(s);
    std::vector<std::size_t> nb, ws;
    for (std::size_t k = 0; k < node.links.size(); ++k)
      (hier_.is_neighbor(level_, s, owner(node.links[k].other)) ? nb : ws).push_back(k);

    Index wcols = 0;
    for (std::size_t k : ws) wcols += node.links[k].block.cols();
    Matrix a_sw(node.dim, wcols);
    Matrix phi_w(wcols, node.phi.cols());
    for (Index c = 0; std::size_t k : ws) {
      const Link& l = node.links[k];
      a_sw.middleCols(c, l.block.cols()) = l.block;
      if (phi_w.cols() > 0) phi_w.middleRows(c, l.block.cols()) = act_[l.other].phi;
      c += l.block.cols();
    }

    LowRankFactor f = compress_step(cfg_, a_sw, node.phi, phi_w, eps_);
    if (f.norm > 0.0) st.max_step_error = std::max(st.max_step_error, f.err / f.norm);
    if (obs_ && obs_->on_compress)
      obs_->on_compress(CompressEvent{level_, s, eps_, a_sw, node.phi, phi_w, f, static_cast<Index>(nb.size()),
                                      static_cast<Index>(ws.size())});

    NodeFactor nf;
    nf.level = level_;
    nf.id = s;
    nf.dim = node.dim;
    nf.rank = f.rank();
    nf.ass = SpdFactor(node.diag, ctx);
    nf.U = std::move(f.U);
    nf.W = nf.ass.solve(nf.U);
    Matrix smat = nf.U.transpose() * nf.W;
    symmetrize(smat);
    nf.schur = SpdFactor(smat, ctx + " (compressed Schur complement)");

    Index ncols = 0;
    for (std::size_t k : nb) ncols += node.links[k].block.cols();
    Matrix a_sn(node.dim, ncols);
    std::vector<Index> col_of(nb.size());
    for (std::size_t i = 0, c = 0; i < nb.size(); ++i) {
      const Matrix& blk = node.links[nb[i]].block;
      col_of[i] = static_cast<Index>(c);
      a_sn.middleCols(static_cast<Index>(c), blk.cols()) = blk;
      c += static_cast<std::size_t>(blk.cols());
    }
    const Matrix z = nf.ass.solve(a_sn);
    const Matrix g = nf.schur.solve(Matrix(nf.U.transpose() * z));
    const Matrix y = z - nf.W * g;
    // A_ns M_ss A_sn, with M_ss = A_ss^{-1} - A_ss^{-1} U S^{-1} U^T A_ss^{-1}.
    const Matrix upd = a_sn.transpose() * y;

    for (std::size_t i = 0; i < nb.size(); ++i) {
      const Index a = node.links[nb[i]].other;
      const Index da = node.links[nb[i]].block.cols();
      Node& na = act_[a];
      na.diag -= upd.block(col_of[i], col_of[i], da, da);
      symmetrize(na.diag);
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        const Index b = node.links[nb[j]].other;
        const Index db = node.links[nb[j]].block.cols();
        const auto blk = upd.block(col_of[i], col_of[j], da, db);
        link_block(na, b, db) -= blk;
        link_block(act_[b], a, da) -= blk.transpose();
      }
    }

    // Parent red node: diagonal S^{-1}, couplings G to neighbors and R^T to
    // well-separated nodes.
    Node& par = act_[n_supers_ + s];
    par.alive = true;
    par.dim = nf.rank;
    par.phi = node.phi.cols() > 0 ? Matrix(nf.U.transpose() * node.phi) : Matrix(nf.rank, 0);
    if (nf.rank > 0) {
      par.diag = nf.schur.inverse();
      symmetrize(par.diag);
      const Index r = n_supers_ + s;
      for (std::size_t i = 0; i < nb.size(); ++i) {
        const Index t = node.links[nb[i]].other;
        const Index dt = node.links[nb[i]].block.cols();
        const Matrix blk = g.middleCols(col_of[i], dt);
        link_block(par, t, dt) = blk;
        link_block(act_[t], r, nf.rank) = blk.transpose();
      }
      for (Index c = 0; std::size_t k : ws) {
        const Index t = node.links[k].other;
        const Index dt = node.links[k].block.cols();
        const Matrix blk = f.Rt.middleCols(c, dt);
        link_block(par, t, dt) = blk;
        link_block(act_[t], r, nf.rank) = blk.transpose();
        c += dt;
      }
    } else {
      par.diag = Matrix(0, 0);
    }

    for (std::size_t k : nb) {
      Link& l = node.links[k];
      nf.couplings.push_back(Coupling{l.other >= n_supers_, owner(l.other), 0, std::move(l.block)});
    }
    for (const Link& l : node.links) erase_link(act_[l.other], s);
    node = Node();

    if (obs_ && obs_->on_step)
      obs_->on_step(StepEvent{level_, s, [this] { return assemble_dense(act_); }});
    return nf;
  }

  const ClusterHierarchy& hier_;
  const SolverConfig& cfg_;
  int level_;
  double eps_;
  const FactorObservers* obs_;
  Index n_supers_;
  std::vector<Index> red_dim_;
  std::vector<Node> act_;
};

std::vector<Node> leaf_nodes(const SparseSymMatrix& a, const ClusterHierarchy& hier, const Matrix& phi) {
  const int depth = hier.depth();
  const Index leaves = hier.num_reds(depth);
  const auto iperm = hier.iperm();
  std::vector<Index> leaf_of(a.n());
  std::vector<Node> reds(leaves);
  for (Index c = 0; c < leaves; ++c) {
    const Index b = hier.red_begin(depth, c);
    const Index e = hier.red_end(depth, c);
    for (Index p = b; p < e; ++p) leaf_of[p] = c;
    reds[c].alive = true;
    reds[c].dim = e - b;
    reds[c].diag = Matrix::Zero(e - b, e - b);
    reds[c].phi.resize(e - b, phi.cols());
    for (Index p = b; p < e; ++p)
      if (phi.cols() > 0) reds[c].phi.row(p - b) = phi.row(hier.perm()[p]);
  }
  const auto ro = a.row_offsets();
  const auto ci = a.col_indices();
  const auto va = a.values();
  for (Index i = 0; i < a.n(); ++i) {
    const Index pi = iperm[i];
    const Index c = leaf_of[pi];
    Node& node = reds[c];
    const Index li = pi - hier.red_begin(depth, c);
    for (Index p = ro[i]; p < ro[i + 1]; ++p) {
      const Index pj = iperm[ci[p]];
      const Index c2 = leaf_of[pj];
      const Index lj = pj - hier.red_begin(depth, c2);
      if (c2 == c) node.diag(li, lj) = va[p];
      else link_block(node, c2, reds[c2].dim)(li, lj) = va[p];
    }
  }
  return reds;
}

} // namespace

HFactorization factorize(const SparseSymMatrix& a, const ClusterHierarchy& hier, const SolverConfig& cfg,
                         const Matrix& preserve, const FactorObservers* obs) {
  cfg.validate();
  if (hier.n() != a.n()) throw DimensionMismatch("hierarchy and matrix sizes differ");
  Matrix phi = preserve;
  if (cfg.preserving()) {
    if (phi.size() == 0) {
      if (cfg.mode != SolverMode::gc_constant) throw InvalidArgument("GC mode needs vectors to preserve");
      phi = Matrix::Ones(a.n(), 1);
    }
    if (phi.rows() != a.n()) throw DimensionMismatch("preserved vectors have the wrong length");
  } else {
    phi = Matrix(a.n(), 0);
  }

  HFactorization h;
  h.cfg_ = cfg;
  h.depth_ = hier.depth();
  h.perm_.assign(hier.perm().begin(), hier.perm().end());
  const double mesh = cfg.h > 0.0 ? cfg.h : 1.0 / (std::sqrt(static_cast<double>(a.n())) + 1.0);

  std::vector<Node> reds = leaf_nodes(a, hier, phi);
  const int l_max = hier.depth();
  const int stop = cfg.max_levels < 0 ? 0 : std::max(0, l_max - cfg.max_levels);
  Index total = 0;
  Index prev_d = 0;
  for (int l = l_max; l > stop; --l) {
    LevelStats st;
    st.level = l;
    st.eps = eps_for_level(cfg, l, l_max, mesh);
    for (const Node& r : reds) st.d = std::max(st.d, r.dim);
    st.d_ratio = prev_d > 0 ? static_cast<double>(st.d) / static_cast<double>(prev_d) : 0.0;
    prev_d = st.d;
    LevelEliminator elim(hier, cfg, l, st.eps, obs, std::move(reds));
    st.fill_entries = elim.fill_entries();
    h.levels_.push_back(elim.run(st));
    reds = elim.parents();
    total += st.factor_entries;
    h.stats_.push_back(st);
    if (cfg.max_factor_entries > 0 && total > cfg.max_factor_entries)
      throw ResourceError("factor storage exceeds the cap at level " + std::to_string(l) + " (" +
                          std::to_string(total) + " entries)");
  }

  // Dense root over the remaining red nodes.
  for (Node& r : reds) r.alive = true;
  const Matrix root = assemble_dense(reds);
  LevelStats st;
  st.level = stop;
  st.nodes = static_cast<Index>(reds.size());
  st.eps = 0.0;
  for (const Node& r : reds) st.d = std::max(st.d, r.dim);
  st.d_ratio = prev_d > 0 ? static_cast<double>(st.d) / static_cast<double>(prev_d) : 0.0;
  st.factor_entries = root.size();
  h.stats_.push_back(st);
  h.root_ = SpdFactor(root, "root level " + std::to_string(stop));
  return h;
}

Index HFactorization::factor_entries() const {
  Index e = root_.entries();
  for (const LevelFactor& lf : levels_)
    for (const NodeFactor& nf : lf.nodes) e += nf.entries();
  return e;
}

std::string HFactorization::stats_json() const {
  nlohmann::json j;
  j["n"] = n();
  j["depth"] = depth_;
  j["eps"] = cfg_.eps;
  j["eps_schedule"] = schedule_name(cfg_.eps_schedule);
  j["mode"] = mode_name(cfg_.mode);
  j["factor_entries"] = factor_entries();
  nlohmann::json lv = nlohmann::json::array();
  for (const LevelStats& s : stats_) {
    lv.push_back({{"level", s.level},
                  {"nodes", s.nodes},
                  {"max_rank", s.max_rank},
                  {"mean_rank", s.mean_rank},
                  {"d", s.d},
                  {"d_ratio", s.d_ratio},
                  {"eps", s.eps},
                  {"fill_entries", s.fill_entries},
                  {"factor_entries", s.factor_entries},
                  {"max_step_error", s.max_step_error}});
  }
  j["levels"] = std::move(lv);
  return j.dump(1);
}

} // namespace lorasp
