// Copyright (C) 2026 the icle authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#include <cstdlib>
#include <string>

#include "icle/common.hpp"
#include "icle/kernels/kernels.hpp"

namespace icle::kernels {

#if defined(__x86_64__) || defined(_M_X64)
const Kernels<float>* avx2_f32();
const Kernels<double>* avx2_f64();
#endif
#if defined(__aarch64__)
const Kernels<float>* neon_f32();
#endif

namespace {

struct Selection {
  const Kernels<float>* f32;
  const Kernels<double>* f64;
  std::string name;
};

Selection select() {
  std::string want = "auto";
  if (const char* env = std::getenv("ICLE_KERNELS")) want = env;

  if (want == "scalar") return {&scalar_f32(), &scalar_f64(), "scalar"};

#if defined(__x86_64__) || defined(_M_X64)
  const bool have_avx2 = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  if (want == "avx2") {
    if (!have_avx2) throw_config("ICLE_KERNELS=avx2 requested but CPU lacks AVX2+FMA");
    return {avx2_f32(), avx2_f64(), "avx2"};
  }
  if (want == "auto" && have_avx2) return {avx2_f32(), avx2_f64(), "avx2"};
#endif
#if defined(__aarch64__)
  if (want == "neon" || want == "auto") return {neon_f32(), &scalar_f64(), "neon"};
#endif
  if (want != "auto") throw_config("unknown ICLE_KERNELS value: " + want);
  return {&scalar_f32(), &scalar_f64(), "scalar"};
}

const Selection& selection() {
  static const Selection s = select();
  return s;
}

}  // namespace

const Kernels<float>& f32() { return *selection().f32; }
const Kernels<double>& f64() { return *selection().f64; }
const std::string& active_name() { return selection().name; }
bool simd_active() { return selection().name != "scalar"; }

}  // namespace icle::kernels
