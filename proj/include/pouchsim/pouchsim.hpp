#ifndef POUCHSIM_POUCHSIM_HPP
#define POUCHSIM_POUCHSIM_HPP

#include "pouchsim/units.hpp"
#include "pouchsim/material.hpp"
#include "pouchsim/actuator.hpp"
#include "pouchsim/arm.hpp"
#include "pouchsim/screening.hpp"
#include "pouchsim/pneumatics.hpp"
#include "pouchsim/trajectory.hpp"
#include "pouchsim/seeds.hpp"
#include "pouchsim/rig.hpp"
#include "pouchsim/filter.hpp"
#include "pouchsim/sparc.hpp"
#include "pouchsim/kinematics.hpp"
#include "pouchsim/special.hpp"
#include "pouchsim/anova.hpp"
#include "pouchsim/tukey.hpp"
#include "pouchsim/metrics.hpp"
#include "pouchsim/csv.hpp"
#include "pouchsim/records.hpp"
#include "pouchsim/config.hpp"
#include "pouchsim/battery.hpp"
#include "pouchsim/report.hpp"
#include "pouchsim/cli.hpp"

#endif // POUCHSIM_POUCHSIM_HPP
