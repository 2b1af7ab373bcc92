// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PERFOHOM_PARALLEL_HPP
#define PERFOHOM_PARALLEL_HPP

#include <cstddef>
#include <utility>

namespace perfohom
{

// Selects the reference (serial) or the OpenMP code path of a kernel.
enum class Exec
{
  serial,
  parallel
};

// Worker count used by every OpenMP region of the library. Defaults to the
// PERFOHOM_THREADS environment variable, else the OpenMP default.
int thread_count();

// n <= 0 restores the default.
void set_thread_count(int n);

// Contiguous static block [begin, end) of `n` items owned by worker `t` of `p`.
inline std::pair<std::size_t, std::size_t> static_block(std::size_t n, int t, int p)
{
  const std::size_t q = n / p, r = n % p;
  const std::size_t tt = static_cast<std::size_t>(t);
  const std::size_t begin = tt * q + (tt < r ? tt : r);
  return {begin, begin + q + (tt < r ? 1 : 0)};
}

}  // namespace perfohom

#endif  // PERFOHOM_PARALLEL_HPP
