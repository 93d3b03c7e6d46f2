use thiserror::Error;

/// Coarse classification used by the HTTP layer and the CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Unauthenticated,
    Forbidden,
    NotFound,
    Conflict,
    Validation,
    Io,
}

#[derive(Debug, Error)]
pub enum DomainError {
    // accounts and sessions
    #[error("password must be at least {min} characters")]
    WeakPassword { min: usize },
    #[error("bad credentials")]
    BadCredentials,
    #[error("account is inactive")]
    AccountInactive,
    #[error("missing, unknown or expired token")]
    Unauthenticated,
    #[error("forbidden: {0}")]
    Forbidden(String),

    // lookups
    #[error("unknown user `{0}`")]
    UnknownUser(String),
    #[error("unknown course `{0}`")]
    UnknownCourse(String),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown outcome `{0}`")]
    UnknownOutcome(String),
    #[error("unknown rubric `{0}`")]
    UnknownRubric(String),
    #[error("unknown skill `{0}`")]
    UnknownSkill(String),
    #[error("unknown grade component `{0}`")]
    UnknownComponent(String),
    #[error("unknown grade item `{0}`")]
    UnknownItem(String),

    // uniqueness
    #[error("duplicate code `{0}`")]
    DuplicateCode(String),
    #[error("skill `{0}` already exists for this course")]
    DuplicateSkill(String),
    #[error("student `{0}` is already enrolled")]
    AlreadyEnrolled(String),

    // validation
    #[error("{0}")]
    Validation(String),
    #[error("graduate attribute must not be empty")]
    EmptyAttribute,
    #[error("`{0}` is not an instructor")]
    NotAnInstructor(String),
    #[error("`{0}` is not a student")]
    NotAStudent(String),
    #[error("student `{0}` is not enrolled in the class")]
    NotEnrolled(String),
    #[error("rubric has no criteria")]
    EmptyCriteria,
    #[error("criterion `{0}` needs max_level > min_level")]
    BadLevelRange(String),
    #[error("criterion `{0}` is not mapped to any outcome")]
    UnmappedCriterion(String),
    #[error("evaluation is missing levels for criteria {0:?}")]
    IncompleteEvaluation(Vec<String>),
    #[error("criterion `{criterion}`: level {level} outside {min}..={max}")]
    LevelOutOfRange {
        criterion: String,
        level: i64,
        min: i64,
        max: i64,
    },
    #[error("{0} is out of range")]
    OutOfRange(String),
    #[error("level range is degenerate")]
    DegenerateRange,
    #[error("weights must be positive")]
    NonPositiveWeight,
    #[error("input is empty")]
    EmptyInput,
    #[error("values and weights differ in length")]
    LengthMismatch,
    #[error("grade component weights sum to {sum}, expected 1")]
    WeightsNotNormalized { sum: f64 },
    #[error("no scores for components {0:?}")]
    IncompleteComponents(Vec<String>),
    #[error("no scores recorded")]
    NoScores,
    #[error("invalid scale: {0}")]
    InvalidScale(String),
    #[error("no evidence in scope")]
    NoEvidence,
    #[error("no evaluated students in scope")]
    NoEvaluatedStudents,
    #[error("score {0} is outside the band scheme domain")]
    OutOfDomain(f64),
    #[error("scope contains no classes")]
    EmptyScope,
    #[error("threshold must lie in (0, 1]")]
    InvalidThreshold,
    #[error("invalid scope expression `{0}`")]
    InvalidScope(String),

    // imports
    #[error("bad header: expected `{expected}`, found `{found}`")]
    BadHeader { expected: String, found: String },
    #[error("file has no data rows")]
    EmptyFile,

    // persistence
    #[error("concurrent commit touched the same entities; retry")]
    ConflictDetected,
    #[error(transparent)]
    Store(#[from] crate::store::StoreError),
}

impl DomainError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        use DomainError::*;
        match self {
            WeakPassword { .. } => "weak_password",
            BadCredentials => "bad_credentials",
            AccountInactive => "account_inactive",
            Unauthenticated => "unauthenticated",
            Forbidden(_) => "forbidden",
            UnknownUser(_) => "unknown_user",
            UnknownCourse(_) => "unknown_course",
            UnknownClass(_) => "unknown_class",
            UnknownOutcome(_) => "unknown_outcome",
            UnknownRubric(_) => "unknown_rubric",
            UnknownSkill(_) => "unknown_skill",
            UnknownComponent(_) => "unknown_component",
            UnknownItem(_) => "unknown_item",
            DuplicateCode(_) => "duplicate_code",
            DuplicateSkill(_) => "duplicate_skill",
            AlreadyEnrolled(_) => "already_enrolled",
            Validation(_) => "validation_error",
            EmptyAttribute => "empty_attribute",
            NotAnInstructor(_) => "not_an_instructor",
            NotAStudent(_) => "not_a_student",
            NotEnrolled(_) => "not_enrolled",
            EmptyCriteria => "empty_criteria",
            BadLevelRange(_) => "bad_level_range",
            UnmappedCriterion(_) => "unmapped_criterion",
            IncompleteEvaluation(_) => "incomplete_evaluation",
            LevelOutOfRange { .. } => "level_out_of_range",
            OutOfRange(_) => "out_of_range",
            DegenerateRange => "degenerate_range",
            NonPositiveWeight => "non_positive_weight",
            EmptyInput => "empty_input",
            LengthMismatch => "length_mismatch",
            WeightsNotNormalized { .. } => "weights_not_normalized",
            IncompleteComponents(_) => "incomplete_components",
            NoScores => "no_scores",
            InvalidScale(_) => "invalid_scale",
            NoEvidence => "no_evidence",
            NoEvaluatedStudents => "no_evaluated_students",
            OutOfDomain(_) => "out_of_domain",
            EmptyScope => "empty_scope",
            InvalidThreshold => "invalid_threshold",
            InvalidScope(_) => "invalid_scope",
            BadHeader { .. } => "bad_header",
            EmptyFile => "empty_file",
            ConflictDetected => "conflict",
            Store(e) => e.code(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        use DomainError::*;
        match self {
            BadCredentials | AccountInactive | Unauthenticated => ErrorKind::Unauthenticated,
            Forbidden(_) => ErrorKind::Forbidden,
            UnknownUser(_) | UnknownCourse(_) | UnknownClass(_) | UnknownOutcome(_)
            | UnknownRubric(_) | UnknownSkill(_) | UnknownComponent(_) | UnknownItem(_)
            | NoEvidence => ErrorKind::NotFound,
            DuplicateCode(_) | DuplicateSkill(_) | AlreadyEnrolled(_) | ConflictDetected => {
                ErrorKind::Conflict
            }
            Store(e) => e.kind(),
            _ => ErrorKind::Validation,
        }
    }

    pub(crate) fn forbidden(reason: impl Into<String>) -> Self {
        DomainError::Forbidden(reason.into())
    }
}

pub type Result<T, E = DomainError> = std::result::Result<T, E>;
