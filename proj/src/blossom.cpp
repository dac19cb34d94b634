#include "gladiator/blossom.hpp"

#include <algorithm>
#include <stdexcept>

namespace gladiator {

namespace {

// Labels: 0 free, 1 S (outer), 2 T (inner); bit 4 marks a scan breadcrumb.
class Matcher {
 public:
  Matcher(int n, const std::vector<WeightedEdge>& edges, bool max_cardinality)
      : n_(n), max_card_(max_cardinality) {
    long long max_w = 0;
    for (const auto& e : edges) {
      if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n || e.i == e.j)
        throw std::invalid_argument("matching edge has invalid endpoints");
      // Doubled weights keep every dual variable integral.
      edges_.push_back({e.i, e.j, 2 * e.weight});
      max_w = std::max(max_w, 2 * e.weight);
    }
    const int m = static_cast<int>(edges_.size());
    endpoint_.resize(2 * static_cast<std::size_t>(m));
    for (int p = 0; p < 2 * m; ++p) endpoint_[at(p)] = p % 2 ? edges_[at(p / 2)].j : edges_[at(p / 2)].i;
    neighbend_.assign(at(n), {});
    for (int k = 0; k < m; ++k) {
      neighbend_[at(edges_[at(k)].i)].push_back(2 * k + 1);
      neighbend_[at(edges_[at(k)].j)].push_back(2 * k);
    }
    mate_.assign(at(n), -1);
    label_.assign(at(2 * n), 0);
    labelend_.assign(at(2 * n), -1);
    inblossom_.resize(at(n));
    for (int v = 0; v < n; ++v) inblossom_[at(v)] = v;
    blossomparent_.assign(at(2 * n), -1);
    blossomchilds_.assign(at(2 * n), {});
    blossombase_.assign(at(2 * n), -1);
    for (int v = 0; v < n; ++v) blossombase_[at(v)] = v;
    blossomendps_.assign(at(2 * n), {});
    bestedge_.assign(at(2 * n), -1);
    blossombestedges_.assign(at(2 * n), {});
    has_bestedges_.assign(at(2 * n), 0);
    for (int b = 2 * n - 1; b >= n; --b) unused_.push_back(b);
    dualvar_.assign(at(2 * n), 0);
    for (int v = 0; v < n; ++v) dualvar_[at(v)] = max_w;
    allowedge_.assign(at(m), 0);
  }

  std::vector<int> run() {
    const int m = static_cast<int>(edges_.size());
    for (int stage = 0; stage < n_; ++stage) {
      std::fill(label_.begin(), label_.end(), 0);
      std::fill(bestedge_.begin(), bestedge_.end(), -1);
      for (int b = n_; b < 2 * n_; ++b) {
        blossombestedges_[at(b)].clear();
        has_bestedges_[at(b)] = 0;
      }
      std::fill(allowedge_.begin(), allowedge_.end(), 0);
      queue_.clear();
      for (int v = 0; v < n_; ++v)
        if (mate_[at(v)] == -1 && label_[at(inblossom_[at(v)])] == 0) assign_label(v, 1, -1);

      bool augmented = false;
      while (true) {
        while (!queue_.empty() && !augmented) {
          const int v = queue_.back();
          queue_.pop_back();
          for (int p : neighbend_[at(v)]) {
            const int k = p / 2;
            const int w = endpoint_[at(p)];
            if (inblossom_[at(v)] == inblossom_[at(w)]) continue;
            long long kslack = 0;
            if (!allowedge_[at(k)]) {
              kslack = slack(k);
              if (kslack <= 0) allowedge_[at(k)] = 1;
            }
            if (allowedge_[at(k)]) {
              if (label_[at(inblossom_[at(w)])] == 0) {
                assign_label(w, 2, p ^ 1);
              } else if (label_[at(inblossom_[at(w)])] == 1) {
                const int base = scan_blossom(v, w);
                if (base >= 0) {
                  add_blossom(base, k);
                } else {
                  augment_matching(k);
                  augmented = true;
                  break;
                }
              } else if (label_[at(w)] == 0) {
                label_[at(w)] = 2;
                labelend_[at(w)] = p ^ 1;
              }
            } else if (label_[at(inblossom_[at(w)])] == 1) {
              const int b = inblossom_[at(v)];
              if (bestedge_[at(b)] == -1 || kslack < slack(bestedge_[at(b)])) bestedge_[at(b)] = k;
            } else if (label_[at(w)] == 0) {
              if (bestedge_[at(w)] == -1 || kslack < slack(bestedge_[at(w)])) bestedge_[at(w)] = k;
            }
          }
        }
        if (augmented) break;

        int deltatype = -1;
        long long delta = 0;
        int deltaedge = -1, deltablossom = -1;
        if (!max_card_) {
          deltatype = 1;
          delta = *std::min_element(dualvar_.begin(), dualvar_.begin() + n_);
        }
        for (int v = 0; v < n_; ++v)
          if (label_[at(inblossom_[at(v)])] == 0 && bestedge_[at(v)] != -1) {
            const long long d = slack(bestedge_[at(v)]);
            if (deltatype == -1 || d < delta) {
              delta = d;
              deltatype = 2;
              deltaedge = bestedge_[at(v)];
            }
          }
        for (int b = 0; b < 2 * n_; ++b)
          if (blossomparent_[at(b)] == -1 && label_[at(b)] == 1 && bestedge_[at(b)] != -1) {
            const long long d = slack(bestedge_[at(b)]) / 2;
            if (deltatype == -1 || d < delta) {
              delta = d;
              deltatype = 3;
              deltaedge = bestedge_[at(b)];
            }
          }
        for (int b = n_; b < 2 * n_; ++b)
          if (blossombase_[at(b)] >= 0 && blossomparent_[at(b)] == -1 && label_[at(b)] == 2 &&
              (deltatype == -1 || dualvar_[at(b)] < delta)) {
            delta = dualvar_[at(b)];
            deltatype = 4;
            deltablossom = b;
          }
        if (deltatype == -1) {
          deltatype = 1;
          delta = std::max<long long>(0, *std::min_element(dualvar_.begin(), dualvar_.begin() + n_));
        }

        for (int v = 0; v < n_; ++v) {
          const int l = label_[at(inblossom_[at(v)])];
          if (l == 1)
            dualvar_[at(v)] -= delta;
          else if (l == 2)
            dualvar_[at(v)] += delta;
        }
        for (int b = n_; b < 2 * n_; ++b)
          if (blossombase_[at(b)] >= 0 && blossomparent_[at(b)] == -1) {
            if (label_[at(b)] == 1)
              dualvar_[at(b)] += delta;
            else if (label_[at(b)] == 2)
              dualvar_[at(b)] -= delta;
          }

        if (deltatype == 1) break;
        if (deltatype == 2) {
          allowedge_[at(deltaedge)] = 1;
          int i = edges_[at(deltaedge)].i, j = edges_[at(deltaedge)].j;
          if (label_[at(inblossom_[at(i)])] == 0) std::swap(i, j);
          queue_.push_back(i);
        } else if (deltatype == 3) {
          allowedge_[at(deltaedge)] = 1;
          queue_.push_back(edges_[at(deltaedge)].i);
        } else {
          expand_blossom(deltablossom, false);
        }
      }
      if (!augmented) break;
      for (int b = n_; b < 2 * n_; ++b)
        if (blossomparent_[at(b)] == -1 && blossombase_[at(b)] >= 0 && label_[at(b)] == 1 &&
            dualvar_[at(b)] == 0)
          expand_blossom(b, true);
    }
    (void)m;
    std::vector<int> out(at(n_), -1);
    for (int v = 0; v < n_; ++v)
      if (mate_[at(v)] >= 0) out[at(v)] = endpoint_[at(mate_[at(v)])];
    return out;
  }

 private:
  static std::size_t at(int i) { return static_cast<std::size_t>(i); }

  long long slack(int k) const {
    const auto& e = edges_[at(k)];
    return dualvar_[at(e.i)] + dualvar_[at(e.j)] - 2 * e.weight;
  }

  void leaves(int b, std::vector<int>& out) const {
    if (b < n_) {
      out.push_back(b);
      return;
    }
    for (int t : blossomchilds_[at(b)]) leaves(t, out);
  }

  std::vector<int> leaves(int b) const {
    std::vector<int> out;
    leaves(b, out);
    return out;
  }

  void assign_label(int w, int t, int p) {
    const int b = inblossom_[at(w)];
    label_[at(w)] = label_[at(b)] = t;
    labelend_[at(w)] = labelend_[at(b)] = p;
    bestedge_[at(w)] = bestedge_[at(b)] = -1;
    if (t == 1) {
      leaves(b, queue_);
    } else if (t == 2) {
      const int base = blossombase_[at(b)];
      assign_label(endpoint_[at(mate_[at(base)])], 1, mate_[at(base)] ^ 1);
    }
  }

  int scan_blossom(int v, int w) {
    std::vector<int> path;
    int base = -1;
    while (v != -1 || w != -1) {
      int b = inblossom_[at(v)];
      if (label_[at(b)] & 4) {
        base = blossombase_[at(b)];
        break;
      }
      path.push_back(b);
      label_[at(b)] = 5;
      if (labelend_[at(b)] == -1) {
        v = -1;
      } else {
        v = endpoint_[at(labelend_[at(b)])];
        b = inblossom_[at(v)];
        v = endpoint_[at(labelend_[at(b)])];
      }
      if (w != -1) std::swap(v, w);
    }
    for (int b : path) label_[at(b)] = 1;
    return base;
  }

  void add_blossom(int base, int k) {
    int v = edges_[at(k)].i, w = edges_[at(k)].j;
    const int bb = inblossom_[at(base)];
    int bv = inblossom_[at(v)];
    int bw = inblossom_[at(w)];
    const int b = unused_.back();
    unused_.pop_back();
    blossombase_[at(b)] = base;
    blossomparent_[at(b)] = -1;
    blossomparent_[at(bb)] = b;
    std::vector<int> path, endps;
    while (bv != bb) {
      blossomparent_[at(bv)] = b;
      path.push_back(bv);
      endps.push_back(labelend_[at(bv)]);
      v = endpoint_[at(labelend_[at(bv)])];
      bv = inblossom_[at(v)];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
      blossomparent_[at(bw)] = b;
      path.push_back(bw);
      endps.push_back(labelend_[at(bw)] ^ 1);
      w = endpoint_[at(labelend_[at(bw)])];
      bw = inblossom_[at(w)];
    }
    blossomchilds_[at(b)] = path;
    blossomendps_[at(b)] = endps;
    label_[at(b)] = 1;
    labelend_[at(b)] = labelend_[at(bb)];
    dualvar_[at(b)] = 0;
    for (int leaf : leaves(b)) {
      if (label_[at(inblossom_[at(leaf)])] == 2) queue_.push_back(leaf);
      inblossom_[at(leaf)] = b;
    }
    std::vector<int> bestedgeto(at(2 * n_), -1);
    for (int child : path) {
      std::vector<int> candidates;
      if (!has_bestedges_[at(child)]) {
        for (int leaf : leaves(child))
          for (int p : neighbend_[at(leaf)]) candidates.push_back(p / 2);
      } else {
        candidates = blossombestedges_[at(child)];
      }
      for (int kk : candidates) {
        int i = edges_[at(kk)].i, j = edges_[at(kk)].j;
        if (inblossom_[at(j)] == b) std::swap(i, j);
        const int bj = inblossom_[at(j)];
        if (bj != b && label_[at(bj)] == 1 &&
            (bestedgeto[at(bj)] == -1 || slack(kk) < slack(bestedgeto[at(bj)])))
          bestedgeto[at(bj)] = kk;
      }
      blossombestedges_[at(child)].clear();
      has_bestedges_[at(child)] = 0;
      bestedge_[at(child)] = -1;
    }
    auto& list = blossombestedges_[at(b)];
    list.clear();
    for (int kk : bestedgeto)
      if (kk != -1) list.push_back(kk);
    has_bestedges_[at(b)] = 1;
    bestedge_[at(b)] = -1;
    for (int kk : list)
      if (bestedge_[at(b)] == -1 || slack(kk) < slack(bestedge_[at(b)])) bestedge_[at(b)] = kk;
  }

  void expand_blossom(int b, bool endstage) {
    const std::vector<int> childs = blossomchilds_[at(b)];
    for (int s : childs) {
      blossomparent_[at(s)] = -1;
      if (s < n_) {
        inblossom_[at(s)] = s;
      } else if (endstage && dualvar_[at(s)] == 0) {
        expand_blossom(s, endstage);
      } else {
        for (int leaf : leaves(s)) inblossom_[at(leaf)] = s;
      }
    }
    if (!endstage && label_[at(b)] == 2) {
      const auto& ch = blossomchilds_[at(b)];
      const auto& ep = blossomendps_[at(b)];
      const int len = static_cast<int>(ch.size());
      auto idx = [len](int j) { return static_cast<std::size_t>(((j % len) + len) % len); };
      const int entrychild = inblossom_[at(endpoint_[at(labelend_[at(b)] ^ 1)])];
      int j = static_cast<int>(std::find(ch.begin(), ch.end(), entrychild) - ch.begin());
      int jstep, endptrick;
      if (j & 1) {
        j -= len;
        jstep = 1;
        endptrick = 0;
      } else {
        jstep = -1;
        endptrick = 1;
      }
      int p = labelend_[at(b)];
      while (j != 0) {
        label_[at(endpoint_[at(p ^ 1)])] = 0;
        label_[at(endpoint_[at(ep[idx(j - endptrick)] ^ endptrick ^ 1)])] = 0;
        assign_label(endpoint_[at(p ^ 1)], 2, p);
        allowedge_[at(ep[idx(j - endptrick)] / 2)] = 1;
        j += jstep;
        p = ep[idx(j - endptrick)] ^ endptrick;
        allowedge_[at(p / 2)] = 1;
        j += jstep;
      }
      int bv = ch[idx(j)];
      label_[at(endpoint_[at(p ^ 1)])] = label_[at(bv)] = 2;
      labelend_[at(endpoint_[at(p ^ 1)])] = labelend_[at(bv)] = p;
      bestedge_[at(bv)] = -1;
      j += jstep;
      while (ch[idx(j)] != entrychild) {
        bv = ch[idx(j)];
        if (label_[at(bv)] == 1) {
          j += jstep;
          continue;
        }
        int found = -1;
        for (int leaf : leaves(bv))
          if (label_[at(leaf)] != 0) {
            found = leaf;
            break;
          }
        if (found >= 0) {
          label_[at(found)] = 0;
          label_[at(endpoint_[at(mate_[at(blossombase_[at(bv)])])])] = 0;
          assign_label(found, 2, labelend_[at(found)]);
        }
        j += jstep;
      }
    }
    label_[at(b)] = labelend_[at(b)] = -1;
    blossomchilds_[at(b)].clear();
    blossomendps_[at(b)].clear();
    blossombase_[at(b)] = -1;
    blossombestedges_[at(b)].clear();
    has_bestedges_[at(b)] = 0;
    bestedge_[at(b)] = -1;
    unused_.push_back(b);
  }

  void augment_blossom(int b, int v) {
    int t = v;
    while (blossomparent_[at(t)] != b) t = blossomparent_[at(t)];
    if (t >= n_) augment_blossom(t, v);
    auto& ch = blossomchilds_[at(b)];
    auto& ep = blossomendps_[at(b)];
    const int len = static_cast<int>(ch.size());
    auto idx = [len](int j) { return static_cast<std::size_t>(((j % len) + len) % len); };
    const int i = static_cast<int>(std::find(ch.begin(), ch.end(), t) - ch.begin());
    int j = i;
    int jstep, endptrick;
    if (i & 1) {
      j -= len;
      jstep = 1;
      endptrick = 0;
    } else {
      jstep = -1;
      endptrick = 1;
    }
    while (j != 0) {
      j += jstep;
      t = ch[idx(j)];
      const int p = ep[idx(j - endptrick)] ^ endptrick;
      if (t >= n_) augment_blossom(t, endpoint_[at(p)]);
      j += jstep;
      t = ch[idx(j)];
      if (t >= n_) augment_blossom(t, endpoint_[at(p ^ 1)]);
      mate_[at(endpoint_[at(p)])] = p ^ 1;
      mate_[at(endpoint_[at(p ^ 1)])] = p;
    }
    std::rotate(ch.begin(), ch.begin() + i, ch.end());
    std::rotate(ep.begin(), ep.begin() + i, ep.end());
    blossombase_[at(b)] = blossombase_[at(ch[0])];
  }

  void augment_matching(int k) {
    const int ends[2][2] = {{edges_[at(k)].i, 2 * k + 1}, {edges_[at(k)].j, 2 * k}};
    for (const auto& start : ends) {
      int s = start[0], p = start[1];
      while (true) {
        const int bs = inblossom_[at(s)];
        if (bs >= n_) augment_blossom(bs, s);
        mate_[at(s)] = p;
        if (labelend_[at(bs)] == -1) break;
        const int t = endpoint_[at(labelend_[at(bs)])];
        const int bt = inblossom_[at(t)];
        s = endpoint_[at(labelend_[at(bt)])];
        const int j = endpoint_[at(labelend_[at(bt)] ^ 1)];
        if (bt >= n_) augment_blossom(bt, j);
        mate_[at(j)] = labelend_[at(bt)];
        p = labelend_[at(bt)] ^ 1;
      }
    }
  }

  int n_;
  bool max_card_;
  std::vector<WeightedEdge> edges_;
  std::vector<int> endpoint_;
  std::vector<std::vector<int>> neighbend_;
  std::vector<int> mate_, label_, labelend_, inblossom_, blossomparent_, blossombase_, bestedge_;
  std::vector<std::vector<int>> blossomchilds_, blossomendps_, blossombestedges_;
  std::vector<char> has_bestedges_, allowedge_;
  std::vector<int> unused_, queue_;
  std::vector<long long> dualvar_;
};

}  // namespace

std::vector<int> max_weight_matching(int n_vertices, const std::vector<WeightedEdge>& edges,
                                     bool max_cardinality) {
  if (n_vertices < 0) throw std::invalid_argument("negative vertex count");
  if (edges.empty() || n_vertices == 0) return std::vector<int>(static_cast<std::size_t>(n_vertices), -1);
  return Matcher(n_vertices, edges, max_cardinality).run();
}

}  // namespace gladiator
