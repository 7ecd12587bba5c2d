#include "aet/error.hpp"
#include "aet/parallel.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace aet {

namespace {

std::mutex& warning_mutex() {
    static std::mutex m;
    return m;
}

WarningHandler& warning_handler() {
    static WarningHandler handler = [](const std::string& msg) {
        std::cerr << "warning: " << msg << '\n';
    };
    return handler;
}

std::atomic<unsigned> requested_threads{0};

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
    std::lock_guard lock(warning_mutex());
    auto previous = std::move(warning_handler());
    warning_handler() = std::move(handler);
    return previous;
}

void warn(const std::string& message) {
    std::lock_guard lock(warning_mutex());
    if (warning_handler()) warning_handler()(message);
}

void set_thread_count(unsigned count) { requested_threads = count; }

unsigned thread_count() {
    const unsigned requested = requested_threads;
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace aet
