// Shared error types, RNG seed derivation, and the worker-thread helper.
#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace dynfpc {

// Malformed or inconsistent input data (files, CSV layout, basis mismatch).
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric failure: factorization breakdown, nonstationarity, non-finite values.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// splitmix64 step; used to derive independent per-task seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic seed for stream `stream` of task `task` under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t task, std::uint64_t stream) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s = a ^ (task * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  std::uint64_t b = splitmix64(s);
  s = b ^ (stream * 0xda942042e4dd58b5ULL + 1);
  return splitmix64(s);
}

// Worker cap: DYNFPC_THREADS if set, else hardware concurrency, at least 1.
inline unsigned worker_threads() {
  if (const char* env = std::getenv("DYNFPC_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1;
}

}  // namespace dynfpc
