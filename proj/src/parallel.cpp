// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include "perfohom/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include <omp.h>

namespace perfohom
{

namespace
{

std::atomic<int> requested{0};

int default_threads()
{
  if (const char *env = std::getenv("PERFOHOM_THREADS"))
  {
    try
    {
      const int n = std::stoi(env);
      if (n > 0)
      {
        return n;
      }
    }
    catch (const std::exception &)
    {
    }
  }
  return omp_get_max_threads();
}

}  // namespace

int thread_count()
{
  const int n = requested.load();
  return n > 0 ? n : default_threads();
}

void set_thread_count(int n)
{
  requested.store(n > 0 ? n : 0);
}

}  // namespace perfohom
