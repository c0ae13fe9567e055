#pragma once

#include <doctest.h>

#include <string>

// Runs f, requires it to throw E, and hands back the message so tests can
// assert on substrings (this doctest build has no Contains matcher).
template <typename E, typename F>
std::string thrown_message(F&& f) {
    try {
        f();
    } catch (const E& e) {
        return e.what();
    } catch (...) {
        FAIL("threw the wrong exception type");
        return {};
    }
    FAIL("expected an exception, none was thrown");
    return {};
}

inline bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}
