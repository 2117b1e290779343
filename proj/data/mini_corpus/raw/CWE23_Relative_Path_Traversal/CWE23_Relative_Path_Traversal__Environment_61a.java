package testcases.CWE23_Relative_Path_Traversal;

import testcasesupport.*;

public class CWE23_Relative_Path_Traversal__Environment_61a extends AbstractTestCase
{
    public void bad() throws Throwable
    {
        String data = (new CWE23_Relative_Path_Traversal__Environment_61b()).badSource();
        IO.writeLine(data);
    }

    public void good() throws Throwable
    {
        String data = (new CWE23_Relative_Path_Traversal__Environment_61b()).goodG2BSource();
        IO.writeLine(data);
    }
}
