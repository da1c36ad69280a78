// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/numcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

#include "anticipate/errors.hpp"
#include "anticipate/numcore/random.hpp"

namespace anticipate::numcore {

namespace {

template <typename T>
void require_same_tape(const Var<T>& a, const Var<T>& b) {
  if (a.tape() != b.tape()) throw ParameterError("operands recorded on different tapes");
}

template <typename T>
void require_same_shape(const char* op, const Shape& a, const Shape& b) {
  if (a != b) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_to_string(a) + " vs " + shape_to_string(b));
  }
}

}  // namespace

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  require_same_tape(x, weight);
  require_same_tape(x, bias);
  const auto& xv = x.value();
  const auto& wv = weight.value();
  const auto& bv = bias.value();
  if (wv.rank() != 2 || xv.cols() != wv.dim(0) || bv.size() != wv.dim(1)) {
    throw DimensionError("linear: x " + shape_to_string(xv.shape()) + " incompatible with W " +
                         shape_to_string(wv.shape()) + " and b " + shape_to_string(bv.shape()));
  }
  const std::size_t rows = xv.rows(), in = wv.dim(0), out = wv.dim(1);
  Shape out_shape = xv.shape();
  out_shape.back() = out;
  Tensor<T> y(out_shape);
  for (std::size_t r = 0; r < rows; ++r) {
    T* yr = y.data() + r * out;
    std::copy(bv.data(), bv.data() + out, yr);
    const T* xr = xv.data() + r * in;
    for (std::size_t i = 0; i < in; ++i) {
      const T xi = xr[i];
      if (xi == T{0}) continue;
      const T* wr = wv.data() + i * out;
      for (std::size_t o = 0; o < out; ++o) yr[o] += xi * wr[o];
    }
  }
  const auto xid = x.id(), wid = weight.id(), bid = bias.id();
  return x.tape()->record(std::move(y), {x, weight, bias}, [=](Tape<T>& tape, std::size_t self) {
    const Tensor<T>& dy = tape.grad(self);
    const Tensor<T>& xval = tape.value(xid);
    const Tensor<T>& wval = tape.value(wid);
    if (tape.requires_grad(xid)) {
      Tensor<T>& dx = tape.grad(xid);
      for (std::size_t r = 0; r < rows; ++r) {
        const T* dyr = dy.data() + r * out;
        T* dxr = dx.data() + r * in;
        for (std::size_t i = 0; i < in; ++i) {
          const T* wr = wval.data() + i * out;
          T acc{0};
          for (std::size_t o = 0; o < out; ++o) acc += dyr[o] * wr[o];
          dxr[i] += acc;
        }
      }
    }
    if (tape.requires_grad(wid)) {
      Tensor<T>& dw = tape.grad(wid);
      for (std::size_t r = 0; r < rows; ++r) {
        const T* dyr = dy.data() + r * out;
        const T* xr = xval.data() + r * in;
        for (std::size_t i = 0; i < in; ++i) {
          const T xi = xr[i];
          if (xi == T{0}) continue;
          T* dwr = dw.data() + i * out;
          for (std::size_t o = 0; o < out; ++o) dwr[o] += xi * dyr[o];
        }
      }
    }
    if (tape.requires_grad(bid)) {
      Tensor<T>& db = tape.grad(bid);
      for (std::size_t r = 0; r < rows; ++r) {
        const T* dyr = dy.data() + r * out;
        for (std::size_t o = 0; o < out; ++o) db[o] += dyr[o];
      }
    }
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same_tape(a, b);
  require_same_shape<T>("add", a.shape(), b.shape());
  Tensor<T> y = a.value();
  const T* bv = b.value().data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  const auto aid = a.id(), bid = b.id();
  return a.tape()->record(std::move(y), {a, b}, [=](Tape<T>& tape, std::size_t self) {
    const Tensor<T>& dy = tape.grad(self);
    for (auto id : {aid, bid}) {
      if (!tape.requires_grad(id)) continue;
      Tensor<T>& d = tape.grad(id);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy[i];
    }
  });
}

template <typename T>
Var<T> add_constant(const Var<T>& a, const Tensor<T>& c) {
  require_same_shape<T>("add_constant", a.shape(), c.shape());
  Tensor<T> y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += c[i];
  const auto aid = a.id();
  return a.tape()->record(std::move(y), {a}, [=](Tape<T>& tape, std::size_t self) {
    const Tensor<T>& dy = tape.grad(self);
    Tensor<T>& d = tape.grad(aid);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy[i];
  });
}

template <typename T>
Var<T> mul_constant(const Var<T>& a, const Tensor<T>& c) {
  require_same_shape<T>("mul_constant", a.shape(), c.shape());
  Tensor<T> y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= c[i];
  const auto aid = a.id();
  return a.tape()->record(std::move(y), {a}, [=, mask = c](Tape<T>& tape, std::size_t self) {
    const Tensor<T>& dy = tape.grad(self);
    Tensor<T>& d = tape.grad(aid);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy[i] * mask[i];
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T factor) {
  Tensor<T> y = a.value();
  for (auto& v : y.values()) v *= factor;
  const auto aid = a.id();
  return a.tape()->record(std::move(y), {a}, [=](Tape<T>& tape, std::size_t self) {
    const Tensor<T>& dy = tape.grad(self);
    Tensor<T>& d = tape.grad(aid);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy[i] * factor;
  });
}

template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps) {
  require_same_tape(x, gamma);
  require_same_tape(x, beta);
  if (!(eps > T{0})) throw ParameterError("layer_norm: eps must be > 0");
  const auto& xv = x.value();
  const std::size_t rows = xv.rows(), d = xv.cols();
  if (d == 0) throw DimensionError("layer_norm: feature dimension is 0");
  if (gamma.value().size() != d || beta.value().size() != d) {
    throw DimensionError("layer_norm: x " + shape_to_string(xv.shape()) + " vs gamma " +
                         shape_to_string(gamma.shape()) + " / beta " + shape_to_string(beta.shape()));
  }
  Tensor<T> y(xv.shape());
  std::vector<T> xhat(xv.size());
  std::vector<T> rstd(rows);
  const T* g = gamma.value().data();
  const T* b = beta.value().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = xv.data() + r * d;
    T mu{0};
    for (std::size_t j = 0; j < d; ++j) mu += xr[j];
    mu /= static_cast<T>(d);
    T var{0};
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<T>(d);
    const T rs = T{1} / std::sqrt(var + eps);
    rstd[r] = rs;
    T* hr = xhat.data() + r * d;
    T* yr = y.data() + r * d;
    for (std::size_t j = 0; j < d; ++j) {
      hr[j] = (xr[j] - mu) * rs;
      yr[j] = g[j] * hr[j] + b[j];
    }
  }
  const auto xid = x.id(), gid = gamma.id(), bid = beta.id();
  return x.tape()->record(std::move(y), {x, gamma, beta},
                          [=, xhat = std::move(xhat), rstd = std::move(rstd)](Tape<T>& tape, std::size_t self) {
                            const Tensor<T>& dy = tape.grad(self);
                            const T* gv = tape.value(gid).data();
                            if (tape.requires_grad(gid)) {
                              Tensor<T>& dg = tape.grad(gid);
                              for (std::size_t r = 0; r < rows; ++r)
                                for (std::size_t j = 0; j < d; ++j) dg[j] += dy[r * d + j] * xhat[r * d + j];
                            }
                            if (tape.requires_grad(bid)) {
                              Tensor<T>& db = tape.grad(bid);
                              for (std::size_t r = 0; r < rows; ++r)
                                for (std::size_t j = 0; j < d; ++j) db[j] += dy[r * d + j];
                            }
                            if (tape.requires_grad(xid)) {
                              Tensor<T>& dx = tape.grad(xid);
                              const T inv_d = T{1} / static_cast<T>(d);
                              for (std::size_t r = 0; r < rows; ++r) {
                                const T* dyr = dy.data() + r * d;
                                const T* hr = xhat.data() + r * d;
                                T m1{0}, m2{0};
                                for (std::size_t j = 0; j < d; ++j) {
                                  const T dh = dyr[j] * gv[j];
                                  m1 += dh;
                                  m2 += dh * hr[j];
                                }
                                m1 *= inv_d;
                                m2 *= inv_d;
                                T* dxr = dx.data() + r * d;
                                for (std::size_t j = 0; j < d; ++j) {
                                  dxr[j] += rstd[r] * (dyr[j] * gv[j] - m1 - hr[j] * m2);
                                }
                              }
                            }
                          });
}

template <typename T>
Var<T> gelu(const Var<T>& x) {
  const T inv_sqrt2 = static_cast<T>(1.0 / std::numbers::sqrt2);
  Tensor<T> y = x.value();
  for (auto& v : y.values()) v = T{0.5} * v * (T{1} + std::erf(v * inv_sqrt2));
  const auto xid = x.id();
  return x.tape()->record(std::move(y), {x}, [=](Tape<T>& tape, std::size_t self) {
    const T inv_sqrt_2pi = static_cast<T>(std::numbers::inv_sqrtpi / std::numbers::sqrt2);
    const Tensor<T>& dy = tape.grad(self);
    const Tensor<T>& xv = tape.value(xid);
    Tensor<T>& dx = tape.grad(xid);
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const T v = xv[i];
      const T cdf = T{0.5} * (T{1} + std::erf(v * inv_sqrt2));
      const T pdf = inv_sqrt_2pi * std::exp(T{-0.5} * v * v);
      dx[i] += dy[i] * (cdf + v * pdf);
    }
  });
}

template <typename T>
Var<T> concat_rows(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t cols = parts.front().value().cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    require_same_tape(parts.front(), p);
    if (p.value().cols() != cols) {
      throw DimensionError("concat_rows: column mismatch " + shape_to_string(parts.front().shape()) + " vs " +
                           shape_to_string(p.shape()));
    }
    rows += p.value().rows();
  }
  Tensor<T> y(Shape{rows, cols});
  std::vector<std::size_t> ids, offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    std::copy(p.value().data(), p.value().data() + p.value().size(), y.data() + offset);
    ids.push_back(p.id());
    offsets.push_back(offset);
    offset += p.value().size();
  }
  return parts.front().tape()->record(std::move(y), parts,
                                      [ids = std::move(ids), offsets = std::move(offsets)](Tape<T>& tape,
                                                                                          std::size_t self) {
                                        const Tensor<T>& dy = tape.grad(self);
                                        for (std::size_t k = 0; k < ids.size(); ++k) {
                                          if (!tape.requires_grad(ids[k])) continue;
                                          Tensor<T>& d = tape.grad(ids[k]);
                                          const T* src = dy.data() + offsets[k];
                                          for (std::size_t i = 0; i < d.size(); ++i) d[i] += src[i];
                                        }
                                      });
}

template <typename T>
Var<T> slice_rows(const Var<T>& x, std::size_t begin, std::size_t count) {
  const auto& xv = x.value();
  const std::size_t cols = xv.cols();
  if (count == 0 || begin + count > xv.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") out of range for " + shape_to_string(xv.shape()));
  }
  Tensor<T> y(Shape{count, cols});
  std::copy(xv.data() + begin * cols, xv.data() + (begin + count) * cols, y.data());
  const auto xid = x.id();
  return x.tape()->record(std::move(y), {x}, [=](Tape<T>& tape, std::size_t self) {
    const Tensor<T>& dy = tape.grad(self);
    Tensor<T>& dx = tape.grad(xid);
    T* dst = dx.data() + begin * cols;
    for (std::size_t i = 0; i < dy.size(); ++i) dst[i] += dy[i];
  });
}

template <typename T>
Var<T> gather_rows(const Var<T>& table, std::span<const int> index) {
  const auto& tv = table.value();
  const std::size_t cols = tv.cols(), n = tv.rows();
  if (index.empty()) throw DimensionError("gather_rows: empty index");
  std::vector<int> idx(index.begin(), index.end());
  Tensor<T> y(Shape{idx.size(), cols});
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0) continue;
    if (static_cast<std::size_t>(idx[r]) >= n) {
      throw IndexError("gather_rows: index " + std::to_string(idx[r]) + " >= table rows " + std::to_string(n));
    }
    std::copy(tv.data() + idx[r] * cols, tv.data() + (idx[r] + 1) * cols, y.data() + r * cols);
  }
  const auto tid = table.id();
  return table.tape()->record(std::move(y), {table}, [=, idx = std::move(idx)](Tape<T>& tape, std::size_t self) {
    const Tensor<T>& dy = tape.grad(self);
    Tensor<T>& dt = tape.grad(tid);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      if (idx[r] < 0) continue;
      T* dst = dt.data() + idx[r] * cols;
      const T* src = dy.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
    }
  });
}

template <typename T>
Var<T> attention(const Var<T>& q, const Var<T>& k, const Var<T>& v, std::span<const std::uint8_t> key_masked,
                 std::size_t heads, Tensor<T>* probs_out) {
  require_same_tape(q, k);
  require_same_tape(q, v);
  const auto& qv = q.value();
  const auto& kv = k.value();
  const auto& vv = v.value();
  if (qv.rank() != 2 || kv.shape() != qv.shape() || vv.shape() != qv.shape()) {
    throw DimensionError("attention: q/k/v shapes " + shape_to_string(qv.shape()) + ", " +
                         shape_to_string(kv.shape()) + ", " + shape_to_string(vv.shape()));
  }
  const std::size_t len = qv.dim(0), dim = qv.dim(1);
  if (heads == 0 || dim % heads != 0) {
    throw DimensionError("attention: model dim " + std::to_string(dim) + " not divisible by " +
                         std::to_string(heads) + " heads");
  }
  if (!key_masked.empty() && key_masked.size() != len) {
    throw DimensionError("attention: mask length " + std::to_string(key_masked.size()) + " != sequence length " +
                         std::to_string(len));
  }
  std::vector<std::uint8_t> masked(len, 0);
  if (!key_masked.empty()) std::copy(key_masked.begin(), key_masked.end(), masked.begin());
  if (std::all_of(masked.begin(), masked.end(), [](std::uint8_t m) { return m != 0; })) {
    throw NumericError("attention: every key is masked, softmax undefined");
  }

  const std::size_t hd = dim / heads;
  const T scale_factor = T{1} / std::sqrt(static_cast<T>(hd));
  auto probs = std::make_shared<std::vector<T>>(heads * len * len, T{0});
  Tensor<T> out(Shape{len, dim});
  std::vector<T> scores(len);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t off = h * hd;
    for (std::size_t i = 0; i < len; ++i) {
      const T* qi = qv.data() + i * dim + off;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < len; ++j) {
        if (masked[j]) continue;
        const T* kj = kv.data() + j * dim + off;
        T s{0};
        for (std::size_t c = 0; c < hd; ++c) s += qi[c] * kj[c];
        s *= scale_factor;
        scores[j] = s;
        mx = std::max(mx, s);
      }
      T total{0};
      T* p = probs->data() + (h * len + i) * len;
      for (std::size_t j = 0; j < len; ++j) {
        if (masked[j]) continue;
        p[j] = std::exp(scores[j] - mx);
        total += p[j];
      }
      const T inv = T{1} / total;
      T* oi = out.data() + i * dim + off;
      for (std::size_t j = 0; j < len; ++j) {
        if (masked[j]) continue;
        p[j] *= inv;
        const T* vj = vv.data() + j * dim + off;
        for (std::size_t c = 0; c < hd; ++c) oi[c] += p[j] * vj[c];
      }
    }
  }
  if (probs_out != nullptr) *probs_out = Tensor<T>(Shape{heads, len, len}, *probs);

  const auto qid = q.id(), kid = k.id(), vid = v.id();
  return q.tape()->record(
      std::move(out), {q, k, v},
      [=, masked = std::move(masked)](Tape<T>& tape, std::size_t self) {
        const Tensor<T>& dout = tape.grad(self);
        const Tensor<T>& qval = tape.value(qid);
        const Tensor<T>& kval = tape.value(kid);
        const Tensor<T>& vval = tape.value(vid);
        Tensor<T>& dq = tape.grad(qid);
        Tensor<T>& dk = tape.grad(kid);
        Tensor<T>& dv = tape.grad(vid);
        std::vector<T> dp(len);
        for (std::size_t h = 0; h < heads; ++h) {
          const std::size_t off = h * hd;
          for (std::size_t i = 0; i < len; ++i) {
            const T* p = probs->data() + (h * len + i) * len;
            const T* doi = dout.data() + i * dim + off;
            T dot{0};
            for (std::size_t j = 0; j < len; ++j) {
              if (masked[j]) {
                dp[j] = T{0};
                continue;
              }
              const T* vj = vval.data() + j * dim + off;
              T* dvj = dv.data() + j * dim + off;
              T acc{0};
              for (std::size_t c = 0; c < hd; ++c) {
                acc += doi[c] * vj[c];
                dvj[c] += p[j] * doi[c];
              }
              dp[j] = acc;
              dot += p[j] * acc;
            }
            const T* qi = qval.data() + i * dim + off;
            T* dqi = dq.data() + i * dim + off;
            for (std::size_t j = 0; j < len; ++j) {
              if (masked[j]) continue;
              const T ds = p[j] * (dp[j] - dot) * scale_factor;
              if (ds == T{0}) continue;
              const T* kj = kval.data() + j * dim + off;
              T* dkj = dk.data() + j * dim + off;
              for (std::size_t c = 0; c < hd; ++c) {
                dqi[c] += ds * kj[c];
                dkj[c] += ds * qi[c];
              }
            }
          }
        }
      });
}

template <typename T>
Var<T> softmax_cross_entropy(const Var<T>& logits, std::span<const int> targets) {
  const auto& lv = logits.value();
  const std::size_t rows = lv.rows(), classes = lv.cols();
  if (targets.size() != rows) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(rows) + " rows");
  }
  std::vector<T> soft(lv.size());
  T loss{0};
  for (std::size_t r = 0; r < rows; ++r) {
    const int t = targets[r];
    if (t < 0 || static_cast<std::size_t>(t) >= classes) {
      throw IndexError("softmax_cross_entropy: target " + std::to_string(t) + " outside [0, " +
                       std::to_string(classes) + ")");
    }
    const T* z = lv.data() + r * classes;
    const T mx = *std::max_element(z, z + classes);
    T total{0};
    for (std::size_t c = 0; c < classes; ++c) {
      soft[r * classes + c] = std::exp(z[c] - mx);
      total += soft[r * classes + c];
    }
    for (std::size_t c = 0; c < classes; ++c) soft[r * classes + c] /= total;
    loss += std::log(total) + mx - z[t];
  }
  loss /= static_cast<T>(rows);
  std::vector<int> tgt(targets.begin(), targets.end());
  const auto lid = logits.id();
  return logits.tape()->record(
      Tensor<T>(Shape{1}, loss), {logits},
      [=, soft = std::move(soft), tgt = std::move(tgt)](Tape<T>& tape, std::size_t self) {
        const T g = tape.grad(self)[0] / static_cast<T>(rows);
        Tensor<T>& dl = tape.grad(lid);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < classes; ++c) {
            const T onehot = static_cast<std::size_t>(tgt[r]) == c ? T{1} : T{0};
            dl[r * classes + c] += g * (soft[r * classes + c] - onehot);
          }
        }
      });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  T total{0};
  for (auto v : x.value().values()) total += v;
  const auto xid = x.id();
  return x.tape()->record(Tensor<T>(Shape{1}, total), {x}, [=](Tape<T>& tape, std::size_t self) {
    const T g = tape.grad(self)[0];
    for (auto& d : tape.grad(xid).values()) d += g;
  });
}

template <typename T>
Var<T> mean(const Var<T>& x) {
  return scale(sum(x), T{1} / static_cast<T>(x.value().size()));
}

template <typename T>
Var<T> sum_squares(const Var<T>& x) {
  T total{0};
  for (auto v : x.value().values()) total += v * v;
  const auto xid = x.id();
  return x.tape()->record(Tensor<T>(Shape{1}, total), {x}, [=](Tape<T>& tape, std::size_t self) {
    const T g = tape.grad(self)[0];
    const Tensor<T>& xv = tape.value(xid);
    Tensor<T>& dx = tape.grad(xid);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += T{2} * g * xv[i];
  });
}

template <typename T>
std::vector<T> softmax(std::span<const T> logits) {
  std::vector<T> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const T mx = *std::max_element(out.begin(), out.end());
  T total{0};
  for (auto& v : out) {
    v = std::exp(v - mx);
    total += v;
  }
  for (auto& v : out) v /= total;
  return out;
}

template <typename T>
Tensor<T> dropout_mask(const Shape& shape, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0) || rate >= 1.0) {
    throw ParameterError("dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
  Tensor<T> mask(shape, T{1});
  if (rate == 0.0) return mask;
  Rng rng(seed);
  const T keep = static_cast<T>(1.0 / (1.0 - rate));
  for (auto& m : mask.values()) m = rng.uniform() < rate ? T{0} : keep;
  return mask;
}

#define ANTICIPATE_INSTANTIATE_OPS(T)                                                                        \
  template Var<T> linear<T>(const Var<T>&, const Var<T>&, const Var<T>&);                                   \
  template Var<T> add<T>(const Var<T>&, const Var<T>&);                                                     \
  template Var<T> add_constant<T>(const Var<T>&, const Tensor<T>&);                                         \
  template Var<T> mul_constant<T>(const Var<T>&, const Tensor<T>&);                                         \
  template Var<T> scale<T>(const Var<T>&, T);                                                               \
  template Var<T> layer_norm<T>(const Var<T>&, const Var<T>&, const Var<T>&, T);                            \
  template Var<T> gelu<T>(const Var<T>&);                                                                   \
  template Var<T> concat_rows<T>(const std::vector<Var<T>>&);                                               \
  template Var<T> slice_rows<T>(const Var<T>&, std::size_t, std::size_t);                                  \
  template Var<T> gather_rows<T>(const Var<T>&, std::span<const int>);                                      \
  template Var<T> attention<T>(const Var<T>&, const Var<T>&, const Var<T>&, std::span<const std::uint8_t>, \
                               std::size_t, Tensor<T>*);                                                     \
  template Var<T> softmax_cross_entropy<T>(const Var<T>&, std::span<const int>);                            \
  template Var<T> sum<T>(const Var<T>&);                                                                    \
  template Var<T> mean<T>(const Var<T>&);                                                                   \
  template Var<T> sum_squares<T>(const Var<T>&);                                                            \
  template std::vector<T> softmax<T>(std::span<const T>);                                                   \
  template Tensor<T> dropout_mask<T>(const Shape&, double, std::uint64_t);

ANTICIPATE_INSTANTIATE_OPS(float)
ANTICIPATE_INSTANTIATE_OPS(double)

#undef ANTICIPATE_INSTANTIATE_OPS

}  // namespace anticipate::numcore
