#include "caries/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

namespace caries {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

struct ConvGeometry {
  int in_ch, out_ch, k, pad, in_h, in_w, out_h, out_w;
  int col_rows() const { return in_ch * k * k; }
  int col_cols() const { return out_h * out_w; }
  bool is_pointwise() const { return k == 1 && pad == 0; }
};

template <typename T>
ConvGeometry conv_geometry(const Shape& in, const Shape& wt, int padding) {
  if (wt.c != in.c) {
    throw ShapeError("conv weight expects " + std::to_string(wt.c) + " input channels, input has " +
                     std::to_string(in.c));
  }
  if (wt.h != wt.w) throw ShapeError("conv kernel must be square, got " + to_string(wt));
  if (padding < 0) throw ShapeError("negative padding");
  ConvGeometry g{in.c, wt.n, wt.h, padding, in.h, in.w, in.h + 2 * padding - wt.h + 1,
                 in.w + 2 * padding - wt.w + 1};
  if (g.out_h < 1 || g.out_w < 1) throw ShapeError("conv kernel larger than padded input");
  return g;
}

template <typename T>
void im2col(const T* plane0, const ConvGeometry& g, T* col) {
  const int hw = g.col_cols();
  for (int ci = 0; ci < g.in_ch; ++ci) {
    const T* src = plane0 + static_cast<std::size_t>(ci) * g.in_h * g.in_w;
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        T* dst = col + static_cast<std::size_t>((ci * g.k + ky) * g.k + kx) * hw;
        const int x_lo = std::max(0, g.pad - kx);
        const int x_hi = std::min(g.out_w, g.in_w + g.pad - kx);
        for (int oy = 0; oy < g.out_h; ++oy) {
          T* row = dst + static_cast<std::size_t>(oy) * g.out_w;
          const int iy = oy + ky - g.pad;
          if (iy < 0 || iy >= g.in_h || x_lo >= x_hi) {
            std::fill(row, row + g.out_w, T{0});
            continue;
          }
          std::fill(row, row + x_lo, T{0});
          const T* s = src + static_cast<std::size_t>(iy) * g.in_w + (x_lo + kx - g.pad);
          std::copy(s, s + (x_hi - x_lo), row + x_lo);
          std::fill(row + x_hi, row + g.out_w, T{0});
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, const ConvGeometry& g, T* plane0) {
  const int hw = g.col_cols();
  std::fill(plane0, plane0 + static_cast<std::size_t>(g.in_ch) * g.in_h * g.in_w, T{0});
  for (int ci = 0; ci < g.in_ch; ++ci) {
    T* dst = plane0 + static_cast<std::size_t>(ci) * g.in_h * g.in_w;
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        const T* src = col + static_cast<std::size_t>((ci * g.k + ky) * g.k + kx) * hw;
        const int x_lo = std::max(0, g.pad - kx);
        const int x_hi = std::min(g.out_w, g.in_w + g.pad - kx);
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy + ky - g.pad;
          if (iy < 0 || iy >= g.in_h) continue;
          const T* s = src + static_cast<std::size_t>(oy) * g.out_w;
          T* d = dst + static_cast<std::size_t>(iy) * g.in_w;
          const int shift = kx - g.pad;
          for (int ox = x_lo; ox < x_hi; ++ox) d[ox + shift] += s[ox];
        }
      }
    }
  }
}

template <typename T>
void require_even(const Shape& s, const char* what) {
  if (s.h % 2 != 0 || s.w % 2 != 0) {
    throw ShapeError(std::string(what) + " needs even spatial extents, got " + to_string(s));
  }
}

}  // namespace

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                              std::span<const T> bias, int padding) {
  const ConvGeometry g = conv_geometry<T>(input.shape(), weights.shape(), padding);
  if (bias.size() != static_cast<std::size_t>(g.out_ch)) {
    throw ShapeError("conv bias has " + std::to_string(bias.size()) + " entries, expected " +
                     std::to_string(g.out_ch));
  }
  const int batch = input.shape().n;
  BasicTensor<T> out(Shape{batch, g.out_ch, g.out_h, g.out_w});
  ConstMapMat<T> wmat(weights.ptr(), g.out_ch, g.col_rows());
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bvec(bias.data(), g.out_ch);
  RowMat<T> col(g.is_pointwise() ? 0 : g.col_rows(), g.is_pointwise() ? 0 : g.col_cols());

  for (int n = 0; n < batch; ++n) {
    MapMat<T> y(out.plane(n, 0), g.out_ch, g.col_cols());
    if (g.is_pointwise()) {
      ConstMapMat<T> x(input.plane(n, 0), g.in_ch, g.col_cols());
      y.noalias() = wmat * x;
    } else {
      im2col(input.plane(n, 0), g, col.data());
      y.noalias() = wmat * col;
    }
    y.colwise() += bvec;
  }
  return out;
}

template <typename T>
ConvGradients<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                                 const BasicTensor<T>& upstream, int padding, bool need_input_grad) {
  const ConvGeometry g = conv_geometry<T>(input.shape(), weights.shape(), padding);
  const int batch = input.shape().n;
  if (upstream.shape() != Shape{batch, g.out_ch, g.out_h, g.out_w}) {
    throw ShapeError("conv upstream gradient shape " + to_string(upstream.shape()) +
                     " does not match forward output");
  }
  ConvGradients<T> grads{BasicTensor<T>{}, BasicTensor<T>(weights.shape()),
                         std::vector<T>(static_cast<std::size_t>(g.out_ch), T{0})};
  if (need_input_grad) grads.input_grad = BasicTensor<T>(input.shape());

  ConstMapMat<T> wmat(weights.ptr(), g.out_ch, g.col_rows());
  MapMat<T> dw(grads.weight_grad.ptr(), g.out_ch, g.col_rows());
  RowMat<T> col(g.col_rows(), g.col_cols());
  RowMat<T> dcol;

  for (int n = 0; n < batch; ++n) {
    ConstMapMat<T> dy(upstream.plane(n, 0), g.out_ch, g.col_cols());
    if (g.is_pointwise()) {
      ConstMapMat<T> x(input.plane(n, 0), g.in_ch, g.col_cols());
      dw.noalias() += dy * x.transpose();
    } else {
      im2col(input.plane(n, 0), g, col.data());
      dw.noalias() += dy * col.transpose();
    }
    // Plain loop: Eigen's vectorized reductions change summation order with
    // buffer alignment, which would break run-to-run reproducibility.
    for (int co = 0; co < g.out_ch; ++co) {
      const T* row = upstream.plane(n, co);
      T acc{0};
      for (int i = 0; i < g.col_cols(); ++i) acc += row[i];
      grads.bias_grad[static_cast<std::size_t>(co)] += acc;
    }
    if (!need_input_grad) continue;
    if (g.is_pointwise()) {
      MapMat<T> dx(grads.input_grad.plane(n, 0), g.in_ch, g.col_cols());
      dx.noalias() = wmat.transpose() * dy;
    } else {
      dcol.noalias() = wmat.transpose() * dy;
      col2im(dcol.data(), g, grads.input_grad.plane(n, 0));
    }
  }
  return grads;
}

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T{0}) {
    const T e = std::exp(-x);
    return T{1} / (T{1} + e);
  }
  const T e = std::exp(x);
  return e / (T{1} + e);
}

template <typename T>
BasicTensor<T> activation_forward(const BasicTensor<T>& input, Activation kind) {
  BasicTensor<T> out(input.shape());
  const std::size_t n = input.size();
  if (kind == Activation::relu) {
    for (std::size_t i = 0; i < n; ++i) out[i] = input[i] > T{0} ? input[i] : T{0};
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = stable_sigmoid(input[i]);
  }
  return out;
}

template <typename T>
BasicTensor<T> activation_backward(const BasicTensor<T>& input, const BasicTensor<T>& upstream,
                                   Activation kind) {
  if (input.shape() != upstream.shape()) throw ShapeError("activation gradient shape mismatch");
  BasicTensor<T> out(input.shape());
  const std::size_t n = input.size();
  if (kind == Activation::relu) {
    for (std::size_t i = 0; i < n; ++i) out[i] = input[i] > T{0} ? upstream[i] : T{0};
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const T s = stable_sigmoid(input[i]);
      out[i] = upstream[i] * s * (T{1} - s);
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> maxpool2x2_forward(const BasicTensor<T>& input) {
  const Shape s = input.shape();
  require_even<T>(s, "max-pool");
  BasicTensor<T> out(Shape{s.n, s.c, s.h / 2, s.w / 2});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = input.plane(n, c);
      T* dst = out.plane(n, c);
      for (int oy = 0; oy < s.h / 2; ++oy) {
        const T* r0 = src + static_cast<std::size_t>(2 * oy) * s.w;
        const T* r1 = r0 + s.w;
        for (int ox = 0; ox < s.w / 2; ++ox) {
          dst[static_cast<std::size_t>(oy) * (s.w / 2) + ox] =
              std::max(std::max(r0[2 * ox], r0[2 * ox + 1]), std::max(r1[2 * ox], r1[2 * ox + 1]));
        }
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> maxpool2x2_backward(const BasicTensor<T>& input, const BasicTensor<T>& upstream) {
  const Shape s = input.shape();
  require_even<T>(s, "max-pool");
  if (upstream.shape() != Shape{s.n, s.c, s.h / 2, s.w / 2}) {
    throw ShapeError("max-pool upstream gradient shape mismatch");
  }
  BasicTensor<T> out(s);
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = input.plane(n, c);
      const T* up = upstream.plane(n, c);
      T* dst = out.plane(n, c);
      for (int oy = 0; oy < s.h / 2; ++oy) {
        for (int ox = 0; ox < s.w / 2; ++ox) {
          std::size_t best = static_cast<std::size_t>(2 * oy) * s.w + 2 * ox;
          const std::size_t cand[3] = {best + 1, best + s.w, best + s.w + 1};
          for (std::size_t idx : cand) {
            if (src[idx] > src[best]) best = idx;
          }
          dst[best] += up[static_cast<std::size_t>(oy) * (s.w / 2) + ox];
        }
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> upsample2x_forward(const BasicTensor<T>& input) {
  const Shape s = input.shape();
  BasicTensor<T> out(Shape{s.n, s.c, 2 * s.h, 2 * s.w});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = input.plane(n, c);
      T* dst = out.plane(n, c);
      for (int y = 0; y < 2 * s.h; ++y) {
        const T* srow = src + static_cast<std::size_t>(y / 2) * s.w;
        T* drow = dst + static_cast<std::size_t>(y) * 2 * s.w;
        for (int x = 0; x < 2 * s.w; ++x) drow[x] = srow[x / 2];
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> upsample2x_backward(const BasicTensor<T>& upstream) {
  const Shape s = upstream.shape();
  require_even<T>(s, "upsample backward");
  BasicTensor<T> out(Shape{s.n, s.c, s.h / 2, s.w / 2});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = upstream.plane(n, c);
      T* dst = out.plane(n, c);
      for (int y = 0; y < s.h; ++y) {
        const T* srow = src + static_cast<std::size_t>(y) * s.w;
        T* drow = dst + static_cast<std::size_t>(y / 2) * (s.w / 2);
        for (int x = 0; x < s.w; ++x) drow[x / 2] += srow[x];
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  const Shape sa = a.shape();
  const Shape sb = b.shape();
  if (sa.n != sb.n || sa.h != sb.h || sa.w != sb.w) {
    throw ShapeError("cannot concatenate " + to_string(sa) + " with " + to_string(sb));
  }
  BasicTensor<T> out(Shape{sa.n, sa.c + sb.c, sa.h, sa.w});
  const std::size_t plane = static_cast<std::size_t>(sa.h) * sa.w;
  for (int n = 0; n < sa.n; ++n) {
    std::copy(a.plane(n, 0), a.plane(n, 0) + plane * sa.c, out.plane(n, 0));
    std::copy(b.plane(n, 0), b.plane(n, 0) + plane * sb.c, out.plane(n, sa.c));
  }
  return out;
}

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> split_channels(const BasicTensor<T>& t, int channels_a) {
  const Shape s = t.shape();
  if (channels_a < 1 || channels_a >= s.c) throw ShapeError("invalid channel split point");
  BasicTensor<T> a(Shape{s.n, channels_a, s.h, s.w});
  BasicTensor<T> b(Shape{s.n, s.c - channels_a, s.h, s.w});
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  for (int n = 0; n < s.n; ++n) {
    std::copy(t.plane(n, 0), t.plane(n, 0) + plane * channels_a, a.plane(n, 0));
    std::copy(t.plane(n, channels_a), t.plane(n, 0) + plane * s.c, b.plane(n, 0));
  }
  return {std::move(a), std::move(b)};
}

#define CARIES_INSTANTIATE_LAYERS(T)                                                                \
  template BasicTensor<T> conv2d_forward(const BasicTensor<T>&, const BasicTensor<T>&,              \
                                         std::span<const T>, int);                                 \
  template ConvGradients<T> conv2d_backward(const BasicTensor<T>&, const BasicTensor<T>&,           \
                                            const BasicTensor<T>&, int, bool);                      \
  template T stable_sigmoid(T);                                                                     \
  template BasicTensor<T> activation_forward(const BasicTensor<T>&, Activation);                    \
  template BasicTensor<T> activation_backward(const BasicTensor<T>&, const BasicTensor<T>&,         \
                                              Activation);                                          \
  template BasicTensor<T> maxpool2x2_forward(const BasicTensor<T>&);                                \
  template BasicTensor<T> maxpool2x2_backward(const BasicTensor<T>&, const BasicTensor<T>&);        \
  template BasicTensor<T> upsample2x_forward(const BasicTensor<T>&);                                \
  template BasicTensor<T> upsample2x_backward(const BasicTensor<T>&);                               \
  template BasicTensor<T> concat_channels(const BasicTensor<T>&, const BasicTensor<T>&);            \
  template std::pair<BasicTensor<T>, BasicTensor<T>> split_channels(const BasicTensor<T>&, int);

CARIES_INSTANTIATE_LAYERS(float)
CARIES_INSTANTIATE_LAYERS(double)

#undef CARIES_INSTANTIATE_LAYERS

}  // namespace caries
