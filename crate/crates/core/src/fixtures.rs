//! Transcriptions of the survey variables used for the anemia and malaria
//! tasks, bundled so a run does not need an external schema file.
//!
//! The common block (biological variables and social determinants shared by
//! both tasks) is followed by the task-specific supplement. "Don't Know"
//! answers are kept as levels, not missing codes.

use crate::data_model::{AnemiaInput, LabelRule, Role, Schema, VariableSpec};

pub const ANEMIA_LABEL_SOURCE: &str = "Hemoglobin level";
pub const MALARIA_LABEL_SOURCE: &str = "Result of malaria test";

const NO_YES: [&str; 2] = ["No", "Yes"];
const NO_YES_DK: [&str; 3] = ["No", "Yes", "Don't Know"];

pub fn common_variables() -> Vec<VariableSpec> {
    vec![
        VariableSpec::categorical("Sex of child", ["Male", "Female"]),
        VariableSpec::numeric("Child height"),
        VariableSpec::categorical("Currently amenorrhic", NO_YES),
        VariableSpec::numeric("Number of antenatal visits during pregnancy"),
        VariableSpec::categorical(
            "Region",
            [
                "Dakar",
                "Ziguinchor",
                "Diourbel",
                "Matam",
                "Saint-Louis",
                "Tambacounda",
                "Thies",
                "Kaolack",
                "Louga",
                "Fatick",
                "Kolda",
                "Kaffrine",
                "Kedougou",
                "Sedhiou",
            ],
        ),
        VariableSpec::categorical("Type place of residence", ["Urban", "Rural"]),
        VariableSpec::categorical(
            "Highest educational level",
            ["No Education", "Primary", "Secondary", "Higher"],
        ),
        VariableSpec::categorical(
            "Source of drinking water",
            [
                "Piped into dwelling",
                "Piped to yard",
                "Public tap",
                "Tube well",
                "Protected well",
                "Unprotected well",
                "River or lake",
                "Cart with small tank",
                "Bottled water",
            ],
        ),
        VariableSpec::categorical(
            "Respondent's occupation",
            [
                "Not working",
                "Sales",
                "Agricultural self-employed",
                "Household and domestic",
                "Services",
                "Skilled manual",
                "Unskilled manual",
            ],
        ),
    ]
}

pub fn anemia_schema() -> Schema {
    let mut vars = common_variables();
    vars.extend([
        VariableSpec::categorical(
            "Received Measles",
            [
                "No",
                "Vaccination date on card",
                "Reported by mother",
                "Marked on card",
                "Don't know",
            ],
        ),
        VariableSpec::categorical("Vitamin A in last 6 months", NO_YES_DK),
        VariableSpec::categorical("Currently breastfeeding", NO_YES),
        VariableSpec::categorical("Drugs for intestinal parasites in last 6 months", NO_YES_DK),
        VariableSpec::numeric(ANEMIA_LABEL_SOURCE).with_role(Role::LabelSource),
        VariableSpec::categorical("Drank from bottle with nipple last night", NO_YES_DK),
        VariableSpec::categorical(
            "Number of times ate solid, semi solid or soft food yesterday",
            ["None", "1", "2", "3", "4", "5", "6", "7+", "Don't know"],
        ),
        VariableSpec::categorical("First 3 days given infant formula", NO_YES),
        VariableSpec::categorical("First 3 days given tea, infusions", NO_YES),
        VariableSpec::categorical("First 3 days given other", NO_YES),
        VariableSpec::categorical(
            "Has health card",
            ["No Card", "Yes seen", "Yes not seen", "No longer has card"],
        ),
    ]);
    Schema::new(
        vars,
        LabelRule::Anemia {
            input: AnemiaInput::Hemoglobin,
        },
    )
}

pub fn malaria_schema() -> Schema {
    let mut vars = common_variables();
    vars.extend([
        VariableSpec::numeric("Respondent's current age"),
        VariableSpec::categorical("Currently pregnant", NO_YES),
        VariableSpec::categorical("Received Vitamin A dose in first 2 months", NO_YES_DK),
        VariableSpec::categorical("Had fever in last two weeks", NO_YES),
        VariableSpec::categorical("Had cough in last two weeks", NO_YES),
        VariableSpec::categorical(MALARIA_LABEL_SOURCE, ["Positive", "Negative"])
            .with_role(Role::LabelSource),
        VariableSpec::categorical(
            "Season of interview",
            ["Rainy season (Sep to January)", "Dry season (February to August)"],
        ),
        VariableSpec::categorical("Household has electricity", NO_YES),
    ]);
    Schema::new(vars, LabelRule::Malaria)
}

/// Variable counts removed per reduction stage in the original study, used
/// as the reproduction profile's configured removal counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionProfile {
    pub initial_variables: usize,
    pub sparse_or_unimportant: usize,
    pub correlation: usize,
    pub rfe: usize,
    pub pca: usize,
}

impl ReductionProfile {
    /// Variables left after all four stages.
    pub const fn final_count(&self) -> usize {
        self.initial_variables - self.sparse_or_unimportant - self.correlation - self.rfe - self.pca
    }
}

pub const ANEMIA_REDUCTION: ReductionProfile = ReductionProfile {
    initial_variables: 986,
    sparse_or_unimportant: 940,
    correlation: 11,
    rfe: 10,
    pca: 2,
};

pub const MALARIA_REDUCTION: ReductionProfile = ReductionProfile {
    initial_variables: 986,
    sparse_or_unimportant: 940,
    correlation: 17,
    rfe: 5,
    pca: 7,
};
