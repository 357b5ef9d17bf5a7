#include "parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <string_view>

namespace orthomeasure::detail {

std::size_t worker_threads() {
  std::size_t hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("ORTHOMEASURE_THREADS")) {
    std::string_view text(env);
    std::size_t cap = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), cap);
    if (ec == std::errc() && ptr == text.data() + text.size() && cap > 0)
      return std::min(hw, cap);
  }
  return hw;
}

}  // namespace orthomeasure::detail
