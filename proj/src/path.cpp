#include "evotree/path.hpp"

#include <algorithm>
#include <charconv>

#include "evotree/errors.hpp"

namespace evotree::tree {

Path Path::from_indices(const std::vector<std::uint32_t>& indices) {
  Path p;
  for (auto i : indices) p = p.child(i);
  return p;
}

Path Path::child(std::uint32_t index) const {
  Path out;
  if (head_ && head_->index == index) {
    out.head_ = std::make_shared<Segment>(Segment{head_->parent, index, head_->run + 1, head_->depth + 1});
  } else {
    out.head_ = std::make_shared<Segment>(Segment{head_, index, 1, depth() + 1});
  }
  return out;
}

void Path::extend(std::uint32_t index) {
  if (head_ && head_->index == index && head_.use_count() == 1) {
    head_->run += 1;
    head_->depth += 1;
    return;
  }
  *this = child(index);
}

std::vector<Path::Run> Path::runs() const {
  std::vector<Run> out;
  for (const Segment* s = head_.get(); s != nullptr; s = s->parent.get()) out.push_back({s->index, s->run});
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::uint32_t> Path::indices() const {
  std::vector<std::uint32_t> out;
  out.reserve(depth());
  for (const auto& r : runs()) out.insert(out.end(), r.run, r.index);
  return out;
}

std::string Path::to_string() const {
  std::string out;
  for (const auto& r : runs()) {
    const std::string token = std::to_string(r.index);
    const bool single = out.empty() && r.run == 1 && token.size() > 1;
    if (r.run >= 4 || single) {
      if (!out.empty()) out += '.';
      out += token + "*" + std::to_string(r.run);
    } else {
      for (std::uint64_t k = 0; k < r.run; ++k) {
        if (!out.empty()) out += '.';
        out += token;
      }
    }
  }
  return out;
}

Path Path::parse(std::string_view text) {
  Path p;
  if (text.empty() || text == "root") return p;
  const bool tokenized = text.find_first_of(".*") != std::string_view::npos;
  if (!tokenized) {
    for (char c : text) {
      if (c < '0' || c > '9') throw Error(ErrorCode::ConfigError, "bad path '" + std::string(text) + "'");
      p = p.child(static_cast<std::uint32_t>(c - '0'));
    }
    return p;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('.', pos), text.size());
    const std::string_view token = text.substr(pos, end - pos);
    const std::size_t star = token.find('*');
    std::uint32_t index = 0;
    std::uint64_t run = 1;
    const auto head = token.substr(0, star);
    auto r1 = std::from_chars(head.data(), head.data() + head.size(), index);
    bool ok = r1.ec == std::errc() && r1.ptr == head.data() + head.size() && !head.empty();
    if (ok && star != std::string_view::npos) {
      const auto tail = token.substr(star + 1);
      auto r2 = std::from_chars(tail.data(), tail.data() + tail.size(), run);
      ok = r2.ec == std::errc() && r2.ptr == tail.data() + tail.size() && !tail.empty();
    }
    if (!ok) throw Error(ErrorCode::ConfigError, "bad path '" + std::string(text) + "'");
    for (std::uint64_t k = 0; k < run; ++k) p = p.child(index);
    pos = end + 1;
  }
  return p;
}

bool Path::starts_with(const Path& prefix) const {
  if (prefix.depth() > depth()) return false;
  const auto mine = indices();
  const auto theirs = prefix.indices();
  return std::equal(theirs.begin(), theirs.end(), mine.begin());
}

bool operator==(const Path& a, const Path& b) {
  if (a.head_ == b.head_) return true;
  return a.depth() == b.depth() && a.indices() == b.indices();
}

}  // namespace evotree::tree
