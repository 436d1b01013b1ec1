#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "holderlab/format.hpp"

// Hand-rolled streaming JSON emitter.  Reports must be byte-reproducible, so
// every double goes through the same 17-significant-digit formatter, keys are
// emitted in the order the caller chooses (always fixed), and non-finite
// numbers become null (JSON has no spelling for them).

namespace holderlab {

class JsonWriter {
 public:
  explicit JsonWriter(std::ostream& os) : os_(os) {}

  JsonWriter& begin_object() {
    pre_value();
    os_ << "{";
    stack_.push_back({'o', true});
    return *this;
  }
  JsonWriter& end_object() {
    const bool empty = stack_.back().first_slot;
    stack_.pop_back();
    if (!empty) newline_indent();
    os_ << "}";
    return *this;
  }
  JsonWriter& begin_array() {
    pre_value();
    os_ << "[";
    stack_.push_back({'a', true});
    return *this;
  }
  JsonWriter& end_array() {
    const bool empty = stack_.back().first_slot;
    stack_.pop_back();
    if (!empty) newline_indent();
    os_ << "]";
    return *this;
  }

  JsonWriter& key(std::string_view k) {
    Frame& f = stack_.back();
    if (!f.first_slot) os_ << ",";
    f.first_slot = false;
    newline_indent();
    write_string(k);
    os_ << ": ";
    pending_key_ = true;
    return *this;
  }

  JsonWriter& value(double v) {
    pre_value();
    if (std::isfinite(v))
      os_ << format_double(v);
    else
      os_ << "null";
    return *this;
  }
  JsonWriter& value(int v) {
    pre_value();
    os_ << v;
    return *this;
  }
  JsonWriter& value(std::uint64_t v) {
    pre_value();
    os_ << v;
    return *this;
  }
  JsonWriter& value(bool v) {
    pre_value();
    os_ << (v ? "true" : "false");
    return *this;
  }
  JsonWriter& value(std::string_view v) {
    pre_value();
    write_string(v);
    return *this;
  }
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& null() {
    pre_value();
    os_ << "null";
    return *this;
  }

  void finish() { os_ << "\n"; }

 private:
  struct Frame {
    char kind;
    bool first_slot;
  };

  void newline_indent() {
    os_ << "\n";
    for (std::size_t i = 0; i < stack_.size(); ++i) os_ << "  ";
  }

  void pre_value() {
    if (pending_key_) {
      pending_key_ = false;
      return;
    }
    if (stack_.empty()) return;
    Frame& f = stack_.back();
    if (f.kind == 'a') {
      if (!f.first_slot) os_ << ",";
      f.first_slot = false;
      newline_indent();
    }
  }

  void write_string(std::string_view s) {
    os_ << '"';
    for (char c : s) {
      switch (c) {
        case '"': os_ << "\\\""; break;
        case '\\': os_ << "\\\\"; break;
        case '\n': os_ << "\\n"; break;
        case '\t': os_ << "\\t"; break;
        case '\r': os_ << "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x",
                          static_cast<unsigned>(static_cast<unsigned char>(c)));
            os_ << buf;
          } else {
            os_ << c;
          }
      }
    }
    os_ << '"';
  }

  std::ostream& os_;
  std::vector<Frame> stack_;
  bool pending_key_ = false;
};

}  // namespace holderlab
