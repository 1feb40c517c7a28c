#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "rotseq/rotseq.h"

namespace rotbench {

enum Exit { kOk = 0, kVerifyFailed = 1, kUsage = 2 };

struct Args {
  std::string algo = "kernel";
  std::string kind = "rotation";
  bool kind_given = false;
  std::size_t m = 0;  // 0: same as n
  std::size_t n = 1000;
  std::size_t k = 180;
  std::string sweep;
  rotseq_shape shape{16, 2};
  rotseq_plan plan{};
  rotseq_cache cache{};
  std::size_t threads = 1;
  std::size_t reps = 3;
  std::uint64_t seed = 42;
  bool strict = true;
  std::string csv;
  bool verify_all = false;
  bool csv_extended = false;
  bool io = false;
  bool inject_fault = false;
};

int cmd_run(const Args& args);
int cmd_verify(const Args& args);
int cmd_model(const Args& args);

}  // namespace rotbench
