#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rjf/types.hpp"

namespace rjf {

// Minimal ordered JSON document. Members keep insertion order and doubles are
// printed with 17 significant digits, so identical runs emit identical bytes.
class Json {
public:
  enum class Kind { Null, Bool, Int, Number, String, Array, Object };

  Json() : kind_(Kind::Null) {}
  static Json object() { Json j; j.kind_ = Kind::Object; return j; }
  static Json array() { Json j; j.kind_ = Kind::Array; return j; }
  static Json str(std::string s);
  static Json num(double v);
  static Json integer(long long v);
  static Json boolean(bool b);
  static Json vec(const Vec& v);

  Json& set(const std::string& key, Json v);  // object member
  Json& push(Json v);                         // array element
  Kind kind() const { return kind_; }

  // read access
  const Json* find(const std::string& key) const;  // nullptr when absent
  const std::vector<Json>& items() const { return items_; }
  const std::vector<std::pair<std::string, Json>>& members() const { return members_; }
  double num_value() const { return kind_ == Kind::Int ? static_cast<double>(int_) : num_; }
  long long int_value() const { return int_; }
  bool bool_value() const { return bool_; }
  const std::string& str_value() const { return str_; }

  std::string dump(int indent = 2) const;

private:
  void write(std::string& out, int indent, int depth) const;

  Kind kind_;
  bool bool_ = false;
  long long int_ = 0;
  double num_ = 0;
  std::string str_;
  std::vector<Json> items_;
  std::vector<std::pair<std::string, Json>> members_;
};

std::string format_double(double v);

}  // namespace rjf
