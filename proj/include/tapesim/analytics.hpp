/*
 * Copyright 2026 The tapesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file analytics.hpp
 * @brief Closed-form queue approximations.
 *
 * With offered load a = lambda / mu and rho = a / c:
 *
 *   P0  = [ sum_{m<c} a^m / m!  +  a^c / (c! (1 - rho)) ]^-1
 *   Lq  = P0 a^c rho / (c! (1 - rho)^2)          (Erlang C, default)
 *   Lq' = P0 rho^(c+1) / (c! (1 - rho)^2)        (LqForm::RhoPower)
 *   Wq  = Lq / lambda
 *   Gq  = Wq (Ca^2 + Cs^2) / 2
 *
 * The two Lq forms agree for c = 1 and differ for c > 1.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tapesim {

enum class LqForm { ErlangC, RhoPower };

struct QueueModelParams {
    double lambda = 0.0;  // arrivals per unit time
    double mu = 1.0;      // service rate of one server
    int servers = 1;
    double ca2 = 1.0;     // squared CoV of inter-arrival times
    double cs2 = 1.0;     // squared CoV of service times

    double rho() const { return lambda / (servers * mu); }
};

class UnstableQueue : public std::runtime_error {
public:
    UnstableQueue(std::string queue, double rho)
        : std::runtime_error("queue '" + queue + "' is unstable (rho = " + std::to_string(rho) + ")"),
          queue_(std::move(queue)) {}
    const std::string& queue() const noexcept { return queue_; }

private:
    std::string queue_;
};

/// Throws UnstableQueue(name) when rho >= 1, std::invalid_argument on
/// nonpositive mu or servers or negative lambda.
void check_stable(const QueueModelParams& p, const std::string& name = "queue");

double p_zero(const QueueModelParams& p);
double mean_queue_length(const QueueModelParams& p, LqForm form = LqForm::ErlangC);
double wait_time(const QueueModelParams& p, LqForm form = LqForm::ErlangC);
double g_g_correction(const QueueModelParams& p, LqForm form = LqForm::ErlangC);

struct EndToEnd {
    double wait_robot = 0.0;  // queue A
    double wait_drive = 0.0;  // queue B
    double service_robot = 0.0;
    double service_drive = 0.0;
    double total() const { return wait_robot + wait_drive + service_robot + service_drive; }
};

/// Two fictitious queues in series: robots (A) then drives (B). Waits use
/// the Gq correction of each queue; s_R = 1/mu_A and s_D = 1/mu_B. Errors
/// name the unstable queue ("robot" or "drive").
EndToEnd end_to_end_estimate(const QueueModelParams& robot, const QueueModelParams& drive,
                             LqForm form = LqForm::ErlangC);

struct SizingRow {
    double lambda = 0.0;
    double rho_robot = 0.0;
    double rho_drive = 0.0;
    bool stable = false;
    double wq_robot = 0.0;
    double wq_drive = 0.0;
    double gq_robot = 0.0;
    double gq_drive = 0.0;
    double end_to_end = 0.0;
};

/// Evaluates end_to_end_estimate at every lambda (the lambda fields of the
/// inputs are ignored). Unstable points are marked, not thrown.
std::vector<SizingRow> sizing_table(const QueueModelParams& robot, const QueueModelParams& drive,
                                    const std::vector<double>& lambdas, LqForm form = LqForm::ErlangC);

}  // namespace tapesim
