//! Library errors mapped onto exit classes.

use crate::config::CliError;
use hsnl::control::ControlError;
use hsnl::experiments::ExperimentError;
use hsnl::fem1d::FemError;
use hsnl::kernels::KernelError;
use hsnl::operators::OperatorError;
use hsnl::quadrature::QuadratureError;
use hsnl::symbols::SymbolError;

pub fn quadrature(e: QuadratureError) -> CliError {
    match e {
        QuadratureError::PanelLimit { .. } => CliError::NonConvergence(e.to_string()),
        QuadratureError::NonFinite { .. } => CliError::Numerical(e.to_string()),
    }
}

pub fn kernel(e: KernelError) -> CliError {
    match e {
        KernelError::NonPositiveRadius(_) | KernelError::InvalidParameter(_) | KernelError::AssumptionViolation(_) => {
            CliError::Config(e.to_string())
        }
        KernelError::Quadrature(q) => quadrature(q),
        KernelError::InfiniteMass | KernelError::Extrapolation(_) => CliError::Numerical(e.to_string()),
    }
}

pub fn symbol(e: SymbolError) -> CliError {
    match e {
        SymbolError::UnsupportedDimension(_)
        | SymbolError::InvalidDirection
        | SymbolError::InvalidFrequency
        | SymbolError::Domain(_) => CliError::Config(e.to_string()),
        SymbolError::Kernel(k) => kernel(k),
        SymbolError::InfiniteMoment | SymbolError::TailNotSummable => CliError::Numerical(e.to_string()),
    }
}

pub fn operator(e: OperatorError) -> CliError {
    match e {
        OperatorError::MissingLipschitz | OperatorError::UnboundedIntegration | OperatorError::InvalidInput(_) => {
            CliError::Config(e.to_string())
        }
        OperatorError::Kernel(k) => kernel(k),
        OperatorError::Symbol(s) => symbol(s),
        OperatorError::Quadrature(q) => quadrature(q),
        _ => CliError::Numerical(e.to_string()),
    }
}

pub fn fem(e: FemError) -> CliError {
    match e {
        FemError::InvalidMesh(_) | FemError::NeedsCutoff | FemError::Coefficient(_) | FemError::Direction => {
            CliError::Config(e.to_string())
        }
        FemError::EigenIteration(_) | FemError::Residual(_) => CliError::NonConvergence(e.to_string()),
        FemError::Kernel(k) => kernel(k),
        FemError::NotPositiveDefinite(_) => CliError::Numerical(e.to_string()),
    }
}

pub fn experiment(e: ExperimentError) -> CliError {
    match e {
        ExperimentError::Config(m) => CliError::Config(m),
        ExperimentError::Reference(f) => fem(f),
        ExperimentError::Cell { source, .. } => fem(source),
        ExperimentError::Kernel(k) => kernel(k),
    }
}

pub fn control(e: ControlError) -> CliError {
    match e {
        ControlError::Invalid(_) | ControlError::EmptyCell { .. } => CliError::Config(e.to_string()),
        ControlError::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
        ControlError::Fem(f) => fem(f),
    }
}
