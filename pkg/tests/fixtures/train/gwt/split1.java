public class SplitShell extends Composite {
    private VerticalSplitPanel vSplit = new VerticalSplitPanel();

    public SplitShell() {
        initWidget(vSplit);
        vSplit.setHeight("300px");
        vSplit.setWidth("500px");
    }
}
