#include "ae1svm/numio.hpp"

#include <charconv>
#include <system_error>

#include "ae1svm/errors.hpp"

namespace ae1svm {

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw DataError("format_double: conversion failed");
    return std::string(buf, end);
}

double parse_double(const std::string& text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    // allow surrounding spaces
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (*(last - 1) == ' ' || *(last - 1) == '\t' || *(last - 1) == '\r'))
        --last;
    auto [end, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || end != last || first == last) {
        throw DataError("not a number: '" + text + "'");
    }
    return value;
}

}  // namespace ae1svm
