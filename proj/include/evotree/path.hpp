#pragma once
// Node identity in an infinite tree: the sequence of child indices from the
// root. Paths share prefixes and store repeated indices as runs, so a
// deterministic chain (a locked ray, a single ray) costs O(1) memory no
// matter how deep it goes.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace evotree::tree {

class Path {
 public:
  Path() = default;  // the root

  static Path from_indices(const std::vector<std::uint32_t>& indices);

  /// Text forms: "" is the root; "0.1.1" is dotted; "1*5" is a run; a string
  /// of bare digits such as "101" is read one digit per level.
  static Path parse(std::string_view text);

  Path child(std::uint32_t index) const;
  /// Same as `*this = child(index)` but reuses storage when this path is the
  /// sole owner of its last run.
  void extend(std::uint32_t index);
  std::uint64_t depth() const { return head_ ? head_->depth : 0; }
  bool is_root() const { return head_ == nullptr; }
  std::vector<std::uint32_t> indices() const;
  std::string to_string() const;
  bool starts_with(const Path& prefix) const;

  friend bool operator==(const Path& a, const Path& b);

 private:
  struct Segment {
    std::shared_ptr<Segment> parent;
    std::uint32_t index;
    std::uint64_t run;
    std::uint64_t depth;  // depth at the end of this segment
  };
  struct Run {
    std::uint32_t index;
    std::uint64_t run;
  };
  std::vector<Run> runs() const;

  std::shared_ptr<Segment> head_;
};

}  // namespace evotree::tree
