// Copyright 2026 The DSC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dsc/conv.hpp"

#include <algorithm>
#include <cmath>

#include "dsc/errors.hpp"

namespace dsc {
namespace {

// Range of output columns ox for which ox*s + j - pad lands inside [0, extent).
struct ValidRange {
  long begin;
  long end;
};

ValidRange valid_outputs(long j, long pad, long stride, long extent, long outputs) {
  // ox*s >= pad - j  and  ox*s <= extent - 1 - j + pad
  long lo_num = pad - j;
  long begin = lo_num <= 0 ? 0 : (lo_num + stride - 1) / stride;
  long hi_num = extent - 1 - j + pad;
  long end = hi_num < 0 ? 0 : hi_num / stride + 1;
  return {std::max(0L, begin), std::min(outputs, end)};
}

// The kernel spans the whole input and the code map is a single site: the
// layer is fully connected and the three ops reduce to dense products.
bool fully_connected(const KernelStack& k, const Shape& signal, const Shape& code) {
  return code[1] == 1 && code[2] == 1 && k.kernel_h() == signal[1] && k.kernel_w() == signal[2] &&
         k.pad_y() == 0 && k.pad_x() == 0;
}

void require_rank3(const Tensor& t, const char* what) {
  if (t.rank() != 3) {
    throw GeometryError(std::string(what) + " must be rank 3 [C, H, W], got " + shape_to_string(t.shape()));
  }
}

}  // namespace

KernelStack::KernelStack(Tensor kernels, Stride stride) : kernels_(std::move(kernels)), stride_(stride) {
  if (kernels_.rank() != 4) {
    throw GeometryError("kernel stack must be rank 4 [features, in_channels, kh, kw], got " +
                        shape_to_string(kernels_.shape()));
  }
  if (stride_.y == 0 || stride_.x == 0) throw GeometryError("kernel stride must be positive");
}

KernelStack KernelStack::random(std::size_t features, std::size_t in_channels, std::size_t kh, std::size_t kw,
                                Stride stride, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor t({features, in_channels, kh, kw});
  for (auto& v : t.values()) v = normal(rng);
  KernelStack k(std::move(t), stride);
  k.normalize();
  return k;
}

double KernelStack::kernel_norm(std::size_t feature) const {
  const std::size_t n = kernel_size();
  const double* p = kernels_.data() + feature * n;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += p[i] * p[i];
  return std::sqrt(acc);
}

void KernelStack::normalize() {
  const std::size_t n = kernel_size();
  for (std::size_t f = 0; f < features(); ++f) {
    const double norm = kernel_norm(f);
    if (norm == 0.0) continue;
    double* p = kernels_.data() + f * n;
    for (std::size_t i = 0; i < n; ++i) p[i] /= norm;
  }
}

Shape KernelStack::code_shape(const Shape& input_shape) const {
  if (input_shape.size() != 3) {
    throw GeometryError("input must be rank 3 [C, H, W], got " + shape_to_string(input_shape));
  }
  if (input_shape[0] != in_channels() || input_shape[1] % stride_.y != 0 || input_shape[2] % stride_.x != 0) {
    throw GeometryError("input " + shape_to_string(input_shape) + " incompatible with kernels " +
                        shape_to_string(kernels_.shape()) + " at stride " + std::to_string(stride_.y) + "x" +
                        std::to_string(stride_.x));
  }
  return {features(), input_shape[1] / stride_.y, input_shape[2] / stride_.x};
}

Shape KernelStack::signal_shape(const Shape& code_shape) const {
  if (code_shape.size() != 3 || code_shape[0] != features()) {
    throw GeometryError("code " + shape_to_string(code_shape) + " incompatible with kernels " +
                        shape_to_string(kernels_.shape()));
  }
  return {in_channels(), code_shape[1] * stride_.y, code_shape[2] * stride_.x};
}

Tensor conv_forward(const Tensor& input, const KernelStack& k) {
  require_rank3(input, "conv_forward input");
  const Shape out_shape = k.code_shape(input.shape());
  Tensor out(out_shape);
  const long C = static_cast<long>(input.dim(0));
  const long H = static_cast<long>(input.dim(1));
  const long W = static_cast<long>(input.dim(2));
  const long F = static_cast<long>(out_shape[0]);
  const long Ho = static_cast<long>(out_shape[1]);
  const long Wo = static_cast<long>(out_shape[2]);
  const long KH = static_cast<long>(k.kernel_h());
  const long KW = static_cast<long>(k.kernel_w());
  const long sy = static_cast<long>(k.stride().y);
  const long sx = static_cast<long>(k.stride().x);
  const long py = k.pad_y();
  const long px = k.pad_x();
  const double* in = input.data();
  const double* w = k.kernels().data();
  double* o = out.data();

  if (fully_connected(k, input.shape(), out_shape)) {
    const std::size_t n = input.size();
    for (long f = 0; f < F; ++f) {
      const double* wf = w + f * n;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += wf[i] * in[i];
      o[f] = acc;
    }
    return out;
  }

  for (long f = 0; f < F; ++f) {
    double* of = o + f * Ho * Wo;
    for (long c = 0; c < C; ++c) {
      const double* ic = in + c * H * W;
      for (long i = 0; i < KH; ++i) {
        const ValidRange rows = valid_outputs(i, py, sy, H, Ho);
        for (long j = 0; j < KW; ++j) {
          const double wv = w[((f * C + c) * KH + i) * KW + j];
          const ValidRange cols = valid_outputs(j, px, sx, W, Wo);
          for (long oy = rows.begin; oy < rows.end; ++oy) {
            const double* irow = ic + (oy * sy + i - py) * W + (j - px);
            double* orow = of + oy * Wo;
            for (long ox = cols.begin; ox < cols.end; ++ox) orow[ox] += wv * irow[ox * sx];
          }
        }
      }
    }
  }
  return out;
}

Tensor conv_transpose(const Tensor& code, const KernelStack& k) {
  require_rank3(code, "conv_transpose code");
  const Shape sig_shape = k.signal_shape(code.shape());
  Tensor out(sig_shape);
  const long C = static_cast<long>(sig_shape[0]);
  const long H = static_cast<long>(sig_shape[1]);
  const long W = static_cast<long>(sig_shape[2]);
  const long F = static_cast<long>(code.dim(0));
  const long Ho = static_cast<long>(code.dim(1));
  const long Wo = static_cast<long>(code.dim(2));
  const long KH = static_cast<long>(k.kernel_h());
  const long KW = static_cast<long>(k.kernel_w());
  const long sy = static_cast<long>(k.stride().y);
  const long sx = static_cast<long>(k.stride().x);
  const long py = k.pad_y();
  const long px = k.pad_x();
  const double* a = code.data();
  const double* w = k.kernels().data();
  double* o = out.data();

  if (fully_connected(k, sig_shape, code.shape())) {
    const std::size_t n = out.size();
    for (long f = 0; f < F; ++f) {
      const double af = a[f];
      if (af == 0.0) continue;
      const double* wf = w + f * n;
      for (std::size_t i = 0; i < n; ++i) o[i] += af * wf[i];
    }
    return out;
  }

  // Stamp each nonzero coefficient's kernel. Contributions to any output
  // element arrive in (f, oy, ox) order, so results are reproducible.
  for (long f = 0; f < F; ++f) {
    for (long oy = 0; oy < Ho; ++oy) {
      for (long ox = 0; ox < Wo; ++ox) {
        const double av = a[(f * Ho + oy) * Wo + ox];
        if (av == 0.0) continue;
        const long y0 = oy * sy - py;
        const long x0 = ox * sx - px;
        const long i_begin = std::max(0L, -y0);
        const long i_end = std::min(KH, H - y0);
        const long j_begin = std::max(0L, -x0);
        const long j_end = std::min(KW, W - x0);
        for (long c = 0; c < C; ++c) {
          const double* wk = w + ((f * C + c) * KH) * KW;
          double* oc = o + c * H * W;
          for (long i = i_begin; i < i_end; ++i) {
            double* orow = oc + (y0 + i) * W + x0;
            const double* wrow = wk + i * KW;
            for (long j = j_begin; j < j_end; ++j) orow[j] += av * wrow[j];
          }
        }
      }
    }
  }
  return out;
}

Tensor kernel_correlation(const Tensor& signal, const Tensor& code, const KernelStack& k) {
  require_rank3(signal, "kernel_correlation signal");
  require_rank3(code, "kernel_correlation code");
  if (k.code_shape(signal.shape()) != code.shape()) {
    throw GeometryError("kernel_correlation: code " + shape_to_string(code.shape()) + " does not match signal " +
                        shape_to_string(signal.shape()));
  }
  Tensor out(k.kernels().shape());
  const long C = static_cast<long>(signal.dim(0));
  const long H = static_cast<long>(signal.dim(1));
  const long W = static_cast<long>(signal.dim(2));
  const long F = static_cast<long>(code.dim(0));
  const long Ho = static_cast<long>(code.dim(1));
  const long Wo = static_cast<long>(code.dim(2));
  const long KH = static_cast<long>(k.kernel_h());
  const long KW = static_cast<long>(k.kernel_w());
  const long sy = static_cast<long>(k.stride().y);
  const long sx = static_cast<long>(k.stride().x);
  const long py = k.pad_y();
  const long px = k.pad_x();
  const double* s = signal.data();
  const double* a = code.data();
  double* g = out.data();

  for (long f = 0; f < F; ++f) {
    for (long oy = 0; oy < Ho; ++oy) {
      for (long ox = 0; ox < Wo; ++ox) {
        const double av = a[(f * Ho + oy) * Wo + ox];
        if (av == 0.0) continue;
        const long y0 = oy * sy - py;
        const long x0 = ox * sx - px;
        const long i_begin = std::max(0L, -y0);
        const long i_end = std::min(KH, H - y0);
        const long j_begin = std::max(0L, -x0);
        const long j_end = std::min(KW, W - x0);
        for (long c = 0; c < C; ++c) {
          double* gk = g + ((f * C + c) * KH) * KW;
          const double* sc = s + c * H * W;
          for (long i = i_begin; i < i_end; ++i) {
            const double* srow = sc + (y0 + i) * W + x0;
            double* grow = gk + i * KW;
            for (long j = j_begin; j < j_end; ++j) grow[j] += av * srow[j];
          }
        }
      }
    }
  }
  return out;
}

}  // namespace dsc
