#pragma once

#include <exception>
#include <stdexcept>
#include <string>

namespace expplan {

// Exit statuses reported by the command-line tool.
enum class exit_status : int {
    ok = 0,
    config = 2,
    contract = 3,
    io = 4,
};

// Bad or missing configuration, unknown fixture references.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Failure reading or writing an artifact.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Base of every numeric-contract violation.
class contract_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class validation_error : public contract_error {
public:
    using contract_error::contract_error;
};

class index_error : public contract_error {
public:
    using contract_error::contract_error;
};

// An implicit sample-size inequality has no solution below the search cap.
class unsatisfiable_error : public contract_error {
public:
    using contract_error::contract_error;
};

// Exact search requested on a domain that is too large.
class size_error : public contract_error {
public:
    using contract_error::contract_error;
};

// A self-check that must hold by construction did not.
class consistency_error : public contract_error {
public:
    using contract_error::contract_error;
};

inline exit_status status_for(const std::exception& e) noexcept {
    if (dynamic_cast<const config_error*>(&e)) return exit_status::config;
    if (dynamic_cast<const io_error*>(&e)) return exit_status::io;
    if (dynamic_cast<const contract_error*>(&e)) return exit_status::contract;
    return exit_status::contract;
}

inline void require(bool condition, const std::string& message) {
    if (!condition) throw validation_error(message);
}

} // namespace expplan
