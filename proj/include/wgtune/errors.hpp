#pragma once

#include <stdexcept>
#include <string>

namespace wgtune {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

#define WGTUNE_ERROR_TYPE(Name)                                        \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what_arg) : Error(what_arg) {}    \
  }

WGTUNE_ERROR_TYPE(InvalidArgument);
WGTUNE_ERROR_TYPE(EmptySpace);
WGTUNE_ERROR_TYPE(UnknownScenario);
WGTUNE_ERROR_TYPE(UnknownTestCase);
WGTUNE_ERROR_TYPE(NoSafeParameter);
WGTUNE_ERROR_TYPE(InvalidDescriptor);
WGTUNE_ERROR_TYPE(InconsistentCounts);
WGTUNE_ERROR_TYPE(IllegalWorkgroupSize);
WGTUNE_ERROR_TYPE(DuplicateTestCase);
WGTUNE_ERROR_TYPE(EmptyTrainingSet);
WGTUNE_ERROR_TYPE(SchemaError);
WGTUNE_ERROR_TYPE(NoLegalParameter);
WGTUNE_ERROR_TYPE(InvalidPartition);
WGTUNE_ERROR_TYPE(IncompleteSpace);
WGTUNE_ERROR_TYPE(InvalidPrediction);
WGTUNE_ERROR_TYPE(IoError);

#undef WGTUNE_ERROR_TYPE

// CSV or text input that could not be parsed; carries the 1-based line number
// when one is known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& what_arg, std::size_t line = 0)
      : Error(line ? what_arg + " (line " + std::to_string(line) + ")" : what_arg),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A workgroup size rejected by the (simulated) runtime at launch.
class RefusedParameter : public Error {
 public:
  RefusedParameter(const std::string& what_arg, int w_c, int w_r)
      : Error(what_arg), w_c_(w_c), w_r_(w_r) {}
  int w_c() const { return w_c_; }
  int w_r() const { return w_r_; }

 private:
  int w_c_;
  int w_r_;
};

}  // namespace wgtune
