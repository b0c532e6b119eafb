#ifndef PIPEUNC_ERROR_HPP
#define PIPEUNC_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pipeunc
{

// Base of everything the library throws. The CLI maps the concrete type to
// an exit code (see exit_code_for in commands.hpp).
class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// A parameter is outside its semantic range (precision = 0, p outside [0,1],
// zero trials, ...).
class invalid_parameter : public error
{
public:
    using error::error;
};

// The domain has no negatives (P_R = 1) and nothing was removed, so FAR is 0/0.
class degenerate_domain : public error
{
public:
    using error::error;
};

class parse_error : public error
{
public:
    parse_error(std::size_t line, const std::string& what)
        : error("line " + std::to_string(line) + ": " + what), line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class validation_error : public parse_error
{
public:
    using parse_error::parse_error;
};

class empty_evidence : public error
{
public:
    using error::error;
};

class invalid_stats : public error
{
public:
    using error::error;
};

class io_error : public error
{
public:
    using error::error;
};

// A conservation law or ordering that must hold by construction did not.
class invariant_violation : public error
{
public:
    using error::error;
};

} // namespace pipeunc

#endif
