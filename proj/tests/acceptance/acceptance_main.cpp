/* Acceptance gate: runs the twelve registered verification criteria and
 * prints one machine-greppable line per criterion.
 *
 *   acceptance_suite                 run all criteria; exit = number failing
 *   acceptance_suite --criterion K   run criterion K only; exit 0 iff it passes
 *   acceptance_suite --list          print the registry and exit
 *
 * All tolerances live inside the criteria themselves (verification.hpp);
 * nothing here can loosen them. */

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "blowup/verification.hpp"

using namespace blowup;

static void print_line(int id, const CheckRecord& rec) {
    std::printf("criterion %2d [%s] %-36s %7.2fs  %s\n", id,
                rec.verdict == Verdict::pass ? "PASS" : "FAIL", rec.name.c_str(),
                rec.runtime_s, rec.details.c_str());
    std::fflush(stdout);
}

int main(int argc, char** argv) {
    bool list_only = false;
    int only_id = 0;

    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--list") == 0) {
            list_only = true;
        } else if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            only_id = std::atoi(argv[++i]);
            if (only_id < 1 || only_id > 12) {
                std::fprintf(stderr, "acceptance_suite: criterion id must be 1..12, got '%s'\n",
                             argv[i]);
                return 2;
            }
        } else {
            std::fprintf(stderr,
                         "usage: acceptance_suite [--criterion K] [--list]\n");
            return 2;
        }
    }

    if (list_only) {
        for (const auto& c : acceptance_criteria())
            std::printf("criterion %2d  %-36s anchor=%s\n", c.id, c.name, c.anchor);
        return 0;
    }

    if (only_id != 0) {
        CheckRecord rec = run_criterion(only_id);
        print_line(only_id, rec);
        return rec.verdict == Verdict::pass ? 0 : 1;
    }

    std::vector<int> ids = all_criterion_ids();
    int fails = 0;
    for (int id : ids) {
        CheckRecord rec = run_criterion(id);
        print_line(id, rec);
        if (rec.verdict != Verdict::pass) ++fails;
    }
    std::printf("acceptance: %d of %zu criteria pass\n",
                static_cast<int>(ids.size()) - fails, ids.size());
    return fails;
}
